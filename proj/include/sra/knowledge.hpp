#pragma once

#include <array>
#include <stdexcept>
#include <string>
#include <vector>

namespace sra {

struct KnowledgeError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct KnowledgeEntry {
    std::string name;
    std::string kind;                     // "object" or "room"
    std::array<double, 3> dims_mean{};    // length, width, height in meters
    std::array<double, 3> dims_std{};
    std::string description;
};

struct RetrievalResult {
    std::string query;
    int top_k = 0;
    std::vector<std::string> entries;  // rendered, descending score
};

inline constexpr int kDefaultTopK = 5;

/// "name: LxWxH m +/- std -- description", parseable back via parse_entry.
std::string render_entry(const KnowledgeEntry& entry);
KnowledgeEntry parse_entry(const std::string& rendered);

class KnowledgeStore {
  public:
    /// Loads newline-delimited JSON records; parse errors carry line numbers
    /// and duplicate names are rejected.
    static KnowledgeStore load(const std::string& path);
    static KnowledgeStore from_entries(std::vector<KnowledgeEntry> entries);

    std::size_t size() const { return entries_.size(); }
    const std::vector<KnowledgeEntry>& entries() const { return entries_; }

    /// Lexical-overlap retrieval: 3 * name-token overlap + description-token
    /// overlap, ties broken by name.
    RetrievalResult retrieve(const std::string& query, int top_k = kDefaultTopK) const;

  private:
    std::vector<KnowledgeEntry> entries_;
};

}  // namespace sra

#include "sra/knowledge.hpp"

#include <json.hpp>

#include <algorithm>
#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

namespace sra {

using nlohmann::json;

namespace {

std::string format_dims(const std::array<double, 3>& d) {
    std::ostringstream out;
    out.setf(std::ios::fixed);
    out.precision(2);
    out << d[0] << "×" << d[1] << "×" << d[2];
    return out.str();
}

std::array<double, 3> parse_dims(const std::string& s) {
    std::array<double, 3> d{};
    std::string copy = s;
    std::size_t pos = 0;
    for (int i = 0; i < 3; ++i) {
        std::size_t sep = copy.find("×", pos);
        std::string part = copy.substr(pos, sep == std::string::npos ? sep : sep - pos);
        d[static_cast<std::size_t>(i)] = std::stod(part);
        if (sep == std::string::npos) break;
        pos = sep + std::string("×").size();
    }
    return d;
}

std::vector<std::string> tokenize(const std::string& text) {
    std::vector<std::string> tokens;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isalnum(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else if (!cur.empty()) {
            tokens.push_back(cur);
            cur.clear();
        }
    }
    if (!cur.empty()) tokens.push_back(cur);
    return tokens;
}

}  // namespace

std::string render_entry(const KnowledgeEntry& entry) {
    return entry.name + ": " + format_dims(entry.dims_mean) + " m ± " +
           format_dims(entry.dims_std) + " — " + entry.description;
}

KnowledgeEntry parse_entry(const std::string& rendered) {
    KnowledgeEntry entry;
    std::size_t colon = rendered.find(": ");
    if (colon == std::string::npos) throw KnowledgeError("unparseable entry: no name");
    entry.name = rendered.substr(0, colon);
    std::size_t m_mark = rendered.find(" m ± ", colon);
    std::size_t dash = rendered.find(" — ", colon);
    if (m_mark == std::string::npos || dash == std::string::npos)
        throw KnowledgeError("unparseable entry: missing dims or description");
    entry.dims_mean = parse_dims(rendered.substr(colon + 2, m_mark - colon - 2));
    std::size_t std_begin = m_mark + std::string(" m ± ").size();
    entry.dims_std = parse_dims(rendered.substr(std_begin, dash - std_begin));
    entry.description = rendered.substr(dash + std::string(" — ").size());
    entry.kind = "object";  // kind is not part of the rendered form
    return entry;
}

KnowledgeStore KnowledgeStore::from_entries(std::vector<KnowledgeEntry> entries) {
    std::set<std::string> names;
    for (const auto& e : entries) {
        if (e.name.empty()) throw KnowledgeError("entry with empty name");
        if (e.description.empty())
            throw KnowledgeError("entry '" + e.name + "' has an empty description");
        if (e.kind != "object" && e.kind != "room")
            throw KnowledgeError("entry '" + e.name + "' has invalid kind '" + e.kind + "'");
        for (double d : e.dims_mean)
            if (d <= 0.0) throw KnowledgeError("entry '" + e.name + "' has non-positive dims");
        if (!names.insert(e.name).second)
            throw KnowledgeError("duplicate entry name '" + e.name + "'");
    }
    KnowledgeStore store;
    store.entries_ = std::move(entries);
    return store;
}

KnowledgeStore KnowledgeStore::load(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw KnowledgeError("cannot open knowledge file: " + path);
    std::vector<KnowledgeEntry> entries;
    std::string line;
    int line_no = 0;
    while (std::getline(in, line)) {
        ++line_no;
        if (line.empty()) continue;
        json j;
        try {
            j = json::parse(line);
            KnowledgeEntry e;
            e.name = j.at("name").get<std::string>();
            e.kind = j.at("kind").get<std::string>();
            auto mean = j.at("dims_mean");
            auto sd = j.at("dims_std");
            for (std::size_t i = 0; i < 3; ++i) {
                e.dims_mean[i] = mean.at(i).get<double>();
                e.dims_std[i] = sd.at(i).get<double>();
            }
            e.description = j.at("description").get<std::string>();
            entries.push_back(std::move(e));
        } catch (const json::exception& ex) {
            throw KnowledgeError(path + ":" + std::to_string(line_no) +
                                 ": parse error: " + ex.what());
        }
    }
    return from_entries(std::move(entries));
}

RetrievalResult KnowledgeStore::retrieve(const std::string& query, int top_k) const {
    if (top_k < 1) throw KnowledgeError("top_k must be >= 1");
    auto query_tokens = tokenize(query);
    std::set<std::string> qset(query_tokens.begin(), query_tokens.end());

    struct Scored {
        double score;
        const KnowledgeEntry* entry;
    };
    std::vector<Scored> scored;
    for (const auto& e : entries_) {
        double name_overlap = 0.0, desc_overlap = 0.0;
        for (const auto& t : tokenize(e.name))
            if (qset.count(t)) name_overlap += 1.0;
        std::set<std::string> seen;
        for (const auto& t : tokenize(e.description))
            if (qset.count(t) && seen.insert(t).second) desc_overlap += 1.0;
        scored.push_back({3.0 * name_overlap + desc_overlap, &e});
    }
    std::sort(scored.begin(), scored.end(), [](const Scored& a, const Scored& b) {
        if (a.score != b.score) return a.score > b.score;
        return a.entry->name < b.entry->name;
    });

    RetrievalResult result;
    result.query = query;
    result.top_k = top_k;
    for (const auto& s : scored) {
        if (s.score <= 0.0) break;  // no lexical overlap at all
        if (static_cast<int>(result.entries.size()) >= top_k) break;
        result.entries.push_back(render_entry(*s.entry));
    }
    return result;
}

}  // namespace sra

#include "sra/knowledge.hpp"

#include <doctest.h>

#include <cstdio>
#include <fstream>
#include <string>

using namespace sra;

namespace {

KnowledgeEntry entry(const std::string& name, const std::string& desc) {
    return {name, "object", {1.0, 0.5, 0.75}, {0.1, 0.05, 0.08}, desc};
}

struct TempFile {
    std::string path;
    explicit TempFile(const std::string& contents) {
        path = std::string("/tmp/sra_knowledge_test_") +
               std::to_string(reinterpret_cast<std::uintptr_t>(this)) + ".jsonl";
        std::ofstream out(path);
        out << contents;
    }
    ~TempFile() { std::remove(path.c_str()); }
};

}  // namespace

TEST_CASE("render_entry and parse_entry round-trip") {
    KnowledgeEntry e{"office chair", "object", {0.6, 0.6, 1.1}, {0.1, 0.1, 0.15},
                     "a swivel chair with armrests"};
    auto rendered = render_entry(e);
    CHECK(rendered.find("office chair") == 0);
    auto back = parse_entry(rendered);
    CHECK(back.name == e.name);
    for (int i = 0; i < 3; ++i) {
        CHECK(back.dims_mean[i] == doctest::Approx(e.dims_mean[i]));
        CHECK(back.dims_std[i] == doctest::Approx(e.dims_std[i]));
    }
    CHECK(back.description == e.description);
    CHECK_THROWS_AS(parse_entry("not a rendered entry"), KnowledgeError);
}

TEST_CASE("retrieval scores name overlap three times description overlap") {
    auto store = KnowledgeStore::from_entries({
        entry("dining chair", "a chair for sitting at a table"),
        entry("table lamp", "a small lamp that sits on a chair side table"),
        entry("sofa", "a long padded seat"),
    });
    auto res = store.retrieve("chair", 3);
    CHECK(res.query == "chair");
    REQUIRE(!res.entries.empty());
    // Name hit (3 points + description point) beats description-only hit.
    CHECK(res.entries.front().find("dining chair") == 0);
}

TEST_CASE("retrieval ties break by name and top_k truncates") {
    auto store = KnowledgeStore::from_entries({
        entry("zebra rug", "striped floor covering"),
        entry("alpaca rug", "soft floor covering"),
        entry("oak table", "a wooden table"),
    });
    auto res = store.retrieve("rug", 2);
    REQUIRE(res.entries.size() == 2);
    CHECK(res.entries[0].find("alpaca rug") == 0);
    CHECK(res.entries[1].find("zebra rug") == 0);

    auto all = store.retrieve("rug covering table", 10);
    CHECK(all.entries.size() <= 10);
    CHECK(all.top_k == 10);
}

TEST_CASE("retrieval with no overlap returns no entries") {
    auto store = KnowledgeStore::from_entries({entry("sofa", "padded seat")});
    CHECK(store.retrieve("spaceship", 5).entries.empty());
}

TEST_CASE("store loads NDJSON and reports parse errors with line numbers") {
    TempFile good(
        R"({"name": "chair", "kind": "object", "dims_mean": [0.5, 0.5, 0.9], "dims_std": [0.1, 0.1, 0.1], "description": "a chair"})"
        "\n"
        R"({"name": "bedroom", "kind": "room", "dims_mean": [4.0, 3.5, 2.6], "dims_std": [1.0, 0.8, 0.2], "description": "a room for sleeping"})"
        "\n");
    auto store = KnowledgeStore::load(good.path);
    CHECK(store.size() == 2);
    CHECK(store.entries()[1].kind == "room");

    TempFile broken(
        R"({"name": "chair", "kind": "object", "dims_mean": [0.5, 0.5, 0.9], "dims_std": [0.1, 0.1, 0.1], "description": "a chair"})"
        "\n"
        "this is not json\n");
    try {
        KnowledgeStore::load(broken.path);
        FAIL("expected KnowledgeError");
    } catch (const KnowledgeError& e) {
        CHECK(std::string(e.what()).find("2") != std::string::npos);
    }
}

TEST_CASE("duplicate names are rejected on load") {
    TempFile dup(
        R"({"name": "chair", "kind": "object", "dims_mean": [0.5, 0.5, 0.9], "dims_std": [0.1, 0.1, 0.1], "description": "a chair"})"
        "\n"
        R"({"name": "chair", "kind": "object", "dims_mean": [0.6, 0.6, 1.0], "dims_std": [0.1, 0.1, 0.1], "description": "another chair"})"
        "\n");
    CHECK_THROWS_AS(KnowledgeStore::load(dup.path), KnowledgeError);
}

TEST_CASE("invalid entries are rejected") {
    TempFile bad_dims(
        R"({"name": "chair", "kind": "object", "dims_mean": [-0.5, 0.5, 0.9], "dims_std": [0.1, 0.1, 0.1], "description": "a chair"})"
        "\n");
    CHECK_THROWS_AS(KnowledgeStore::load(bad_dims.path), KnowledgeError);
    TempFile bad_kind(
        R"({"name": "chair", "kind": "vehicle", "dims_mean": [0.5, 0.5, 0.9], "dims_std": [0.1, 0.1, 0.1], "description": "a chair"})"
        "\n");
    CHECK_THROWS_AS(KnowledgeStore::load(bad_kind.path), KnowledgeError);
}

TEST_CASE("bundled knowledge base loads cleanly") {
    auto store = KnowledgeStore::load(std::string(SRA_SOURCE_DIR) +
                                      "/data/knowledge.jsonl");
    CHECK(store.size() >= 50);
    CHECK(!store.retrieve("chair").entries.empty());
}

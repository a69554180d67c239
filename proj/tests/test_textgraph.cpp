#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>
#include <set>

#include "regnn/rng.hpp"
#include "regnn/textgraph.hpp"

using namespace regnn;

namespace {

// O(V^2 * spans) recount, independent of PmiTable's incremental bookkeeping.
struct NaivePmi {
    std::vector<std::vector<int>> spans;

    long long count(int t) const {
        long long c = 0;
        for (const auto& s : spans)
            if (std::find(s.begin(), s.end(), t) != s.end()) ++c;
        return c;
    }
    long long pair(int a, int b) const {
        long long c = 0;
        for (const auto& s : spans) {
            bool ha = std::find(s.begin(), s.end(), a) != s.end();
            bool hb = std::find(s.begin(), s.end(), b) != s.end();
            if (ha && hb) ++c;
        }
        return c;
    }
    double pmi(int a, int b) const {
        long long pc = pair(a, b);
        if (pc == 0) return -std::numeric_limits<double>::infinity();
        return std::log(static_cast<double>(pc) * spans.size() /
                        (static_cast<double>(count(a)) * count(b)));
    }
};

std::vector<std::string> span_names(std::initializer_list<const char*> xs) {
    return {xs.begin(), xs.end()};
}

}  // namespace

TEST_CASE("tokenize: sentences, windows, truncation") {
    Tokenized a = tokenize("A b. C d!");
    REQUIRE(a.spans.size() == 2);
    CHECK(a.spans[0] == span_names({"a", "b"}));
    CHECK(a.spans[1] == span_names({"c", "d"}));
    CHECK(a.tokens == span_names({"a", "b", "c", "d"}));

    TokenizerOptions w2;
    w2.window = 2;
    Tokenized b = tokenize("a b c", w2);
    REQUIRE(b.spans.size() == 2);
    CHECK(b.spans[0] == span_names({"a", "b"}));
    CHECK(b.spans[1] == span_names({"b", "c"}));

    std::string long_doc;
    for (int i = 0; i < 250; ++i) long_doc += "w" + std::to_string(i) + " ";
    CHECK(tokenize(long_doc).tokens.size() == 200);

    CHECK(tokenize("").tokens.empty());
    CHECK(tokenize("").spans.empty());
}

TEST_CASE("tokenize detaches punctuation and lowercases") {
    Tokenized t = tokenize("Hello, world");
    CHECK(t.tokens == span_names({"hello", ",", "world"}));
}

TEST_CASE("vocab: min_count boundary and UNK collapsing") {
    std::vector<std::vector<std::string>> corpus;
    for (int i = 0; i < 4; ++i) corpus.push_back({"rare", "common"});
    corpus.push_back({"common"});
    Vocab v = Vocab::build(corpus, 5);
    CHECK(v.id("rare") == Vocab::kUnk);       // frequency 4 < 5
    CHECK(v.id("common") != Vocab::kUnk);     // frequency 5
    CHECK(v.frequency("rare") == 4);

    Vocab all = Vocab::build(corpus, 1);
    CHECK(all.id("rare") != Vocab::kUnk);

    CHECK_THROWS_AS(Vocab::build({}, 5), IngestError);
}

TEST_CASE("pmi worked examples") {
    // Spans {"a b", "a b"}: always co-present, PMI = 0.
    PmiTable t0;
    t0.add_span({4, 5});
    t0.add_span({4, 5});
    CHECK(t0.pmi(4, 5) == doctest::Approx(0.0));

    // Spans {"a b c", "a b", "c d", "a d"}.
    PmiTable t1;
    int a = 4, b = 5, c = 6, d = 7;
    t1.add_span({a, b, c});
    t1.add_span({a, b});
    t1.add_span({c, d});
    t1.add_span({a, d});
    CHECK(t1.pmi(a, b) == doctest::Approx(std::log(4.0 / 3.0)).epsilon(1e-12));
    CHECK(t1.pmi(a, d) == doctest::Approx(std::log(2.0 / 3.0)));
    CHECK(t1.pmi(a, d) < 0.0);  // excluded from candidates
}

TEST_CASE("pmi duplicate tokens in a span count once") {
    PmiTable t;
    t.add_span({4, 4, 5});
    CHECK(t.span_count(4) == 1);
    CHECK(t.pair_count(4, 5) == 1);
}

TEST_CASE("pmi matches naive recount on random corpora") {
    Rng rng(1234);
    for (int trial = 0; trial < 100; ++trial) {
        int vocab = 2 + static_cast<int>(rng.next_below(9));
        int nspans = 1 + static_cast<int>(rng.next_below(20));
        NaivePmi naive;
        PmiTable table;
        for (int s = 0; s < nspans; ++s) {
            std::vector<int> span;
            int len = 1 + static_cast<int>(rng.next_below(8));
            for (int k = 0; k < len; ++k) span.push_back(static_cast<int>(rng.next_below(vocab)));
            naive.spans.push_back(span);
            table.add_span(span);
        }
        for (int i = 0; i < vocab; ++i) {
            CHECK(table.span_count(i) == naive.count(i));
            for (int j = i + 1; j < vocab; ++j) {
                CHECK(table.pair_count(i, j) == naive.pair(i, j));
                CHECK(table.pair_count(j, i) == table.pair_count(i, j));
                if (naive.pair(i, j) > 0) {
                    CHECK(table.pmi(i, j) == doctest::Approx(naive.pmi(i, j)).epsilon(1e-12));
                    CHECK(table.pmi(i, j) == table.pmi(j, i));
                }
                CHECK(table.pair_count(i, j) <= std::min(table.span_count(i), table.span_count(j)));
            }
        }
    }
}

TEST_CASE("build_graph: hand-worked cases") {
    PmiTable empty;

    // Single-token document.
    TextGraph g1 = build_graph({4}, empty, 4);
    REQUIRE(g1.size() == 1);
    CHECK(g1.neighbors[0].empty());

    // "a b c", no positive PMI, n=4: chain.
    TextGraph g2 = build_graph({4, 5, 6}, empty, 4);
    CHECK(g2.neighbors[0] == std::vector<int>{1});
    CHECK(g2.neighbors[1] == std::vector<int>{0, 2});
    CHECK(g2.neighbors[2] == std::vector<int>{1});

    // "a b c d" with positive PMI only for (a,c), n=3.
    PmiTable t;
    int a = 4, b = 5, c = 6, d = 7;
    t.add_span({a, c});
    t.add_span({a, c});
    t.add_span({b});
    t.add_span({d});
    REQUIRE(t.pmi(a, c) > 0.0);
    TextGraph g3 = build_graph({a, b, c, d}, t, 3);
    CHECK(g3.neighbors[0] == std::vector<int>{1, 2});
    CHECK(g3.neighbors[1] == std::vector<int>{0, 2});
    CHECK(g3.neighbors[2] == std::vector<int>{1, 3, 0});
    CHECK(g3.neighbors[3] == std::vector<int>{2});

    CHECK_THROWS_AS(build_graph({4, 5}, empty, 1), ConfigError);
}

TEST_CASE("build_graph invariants on random inputs") {
    Rng rng(99);
    for (int trial = 0; trial < 40; ++trial) {
        int vocab = 4 + 4 + static_cast<int>(rng.next_below(6));
        PmiTable pmi;
        int nspans = 3 + static_cast<int>(rng.next_below(10));
        for (int s = 0; s < nspans; ++s) {
            std::vector<int> span;
            int len = 2 + static_cast<int>(rng.next_below(5));
            for (int k = 0; k < len; ++k)
                span.push_back(4 + static_cast<int>(rng.next_below(vocab - 4)));
            pmi.add_span(span);
        }
        int m = 2 + static_cast<int>(rng.next_below(12));
        std::vector<int> tokens;
        for (int i = 0; i < m; ++i) tokens.push_back(4 + static_cast<int>(rng.next_below(vocab - 4)));
        int n = 2 + static_cast<int>(rng.next_below(5));

        TextGraph g = build_graph(tokens, pmi, n);
        TextGraph h = build_graph(tokens, pmi, n);
        for (int i = 0; i < m; ++i) {
            CHECK(g.neighbors[i] == h.neighbors[i]);  // determinism
            CHECK(static_cast<int>(g.neighbors[i].size()) <= n);
            CHECK(g.neighbors[i].size() >= 1);  // m >= 2: at least one direct neighbor
            std::set<int> uniq(g.neighbors[i].begin(), g.neighbors[i].end());
            CHECK(uniq.size() == g.neighbors[i].size());  // no duplicates
            CHECK(uniq.count(i) == 0);                    // no self loop
            if (i > 0) CHECK(uniq.count(i - 1) == 1);
            if (i + 1 < m) CHECK(uniq.count(i + 1) == 1);
        }
    }
}

TEST_CASE("symmetrize adds reverse edges") {
    PmiTable t;
    int a = 4, b = 5, c = 6, d = 7, e = 8;
    // Make (a,e) strongly positive so node 0 selects node 4, which has a full
    // direct-neighbor budget at n=2... use n=3 and check reverse edge.
    t.add_span({a, e});
    t.add_span({a, e});
    t.add_span({b});
    t.add_span({c});
    t.add_span({d});
    std::vector<int> tokens{a, b, c, d, e};
    TextGraph g = build_graph(tokens, t, 3, /*symmetrize=*/true);
    auto& nb0 = g.neighbors[0];
    auto& nb4 = g.neighbors[4];
    CHECK(std::find(nb0.begin(), nb0.end(), 4) != nb0.end());
    CHECK(std::find(nb4.begin(), nb4.end(), 0) != nb4.end());
}

TEST_CASE("corpus file parsing") {
    std::string path = "test_corpus_tmp.txt";
    {
        std::ofstream out(path);
        out << "earn\tthe quick brown fox\n";
        out << "grain|wheat\twheat prices rose\n";
    }
    auto docs = read_corpus_file(path);
    REQUIRE(docs.size() == 2);
    CHECK(docs[0].labels == std::vector<std::string>{"earn"});
    CHECK(docs[1].labels == std::vector<std::string>{"grain", "wheat"});
    CHECK(docs[1].text == "wheat prices rose");
    std::remove(path.c_str());

    CHECK_THROWS_AS(read_corpus_file("no_such_file.txt"), IoError);
}

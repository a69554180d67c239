#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <algorithm>
#include <cmath>

#include "regnn/diagnostics.hpp"
#include "regnn/synthetic.hpp"

using namespace regnn;

TEST_CASE("cosine distance: orthogonal basis plus diagonal, by hand") {
    float r = static_cast<float>(1.0 / std::sqrt(2.0));
    std::vector<std::vector<float>> rows{{1, 0}, {0, 1}, {r, r}};
    // Pairs: (e1,e2)=1, and twice 1 - 1/sqrt(2).
    double want = (1.0 + 2.0 * (1.0 - 1.0 / std::sqrt(2.0))) / 3.0;
    CosineStats s = avg_cosine_distance(rows);
    CHECK(s.mean == doctest::Approx(want).epsilon(1e-6));
    CHECK(s.zero_norm_pairs == 0);
}

TEST_CASE("cosine distance ignores positive row scaling and row order") {
    std::vector<std::vector<float>> rows{{1, 2, 3}, {-1, 0, 1}, {2, 2, 1}, {0, 1, 4}};
    double base = avg_cosine_distance(rows).mean;

    std::vector<std::vector<float>> scaled = rows;
    float scales[] = {0.5f, 3.0f, 7.0f, 0.01f};
    for (std::size_t i = 0; i < scaled.size(); ++i)
        for (auto& x : scaled[i]) x *= scales[i];
    CHECK(avg_cosine_distance(scaled).mean == doctest::Approx(base).epsilon(1e-5));

    std::vector<std::vector<float>> shuffled{rows[2], rows[0], rows[3], rows[1]};
    CHECK(avg_cosine_distance(shuffled).mean == doctest::Approx(base).epsilon(1e-12));
}

TEST_CASE("cosine distance: zero-norm rows count as maximally distant") {
    std::vector<std::vector<float>> rows{{0, 0}, {1, 0}, {0, 0}};
    CosineStats s = avg_cosine_distance(rows);
    CHECK(s.zero_norm_pairs == 3);  // every pair touches a zero row
    CHECK(s.mean == doctest::Approx(1.0));

    CHECK_THROWS_AS(avg_cosine_distance({{1.0f}}), ContractError);
}

TEST_CASE("identical rows are at distance zero") {
    std::vector<std::vector<float>> rows(5, std::vector<float>{0.3f, -0.7f, 0.2f});
    CHECK(avg_cosine_distance(rows).mean == doctest::Approx(0.0));
}

namespace {

TrainConfig tiny_cfg() {
    TrainConfig cfg;
    cfg.hidden = 6;
    cfg.layers = 3;
    cfg.max_neighbors = 3;
    cfg.max_len = 32;
    cfg.epochs = 1;
    cfg.seed = 2;
    return cfg;
}

SyntheticOptions tiny_task() {
    SyntheticOptions opt;
    opt.num_docs = 40;
    opt.vocab_words = 40;
    opt.min_len = 6;
    opt.max_len = 10;
    opt.seed = 21;
    return opt;
}

}  // namespace

TEST_CASE("smoothing profile: one row per layer, sane ranges, CSV shape") {
    TrainConfig cfg = tiny_cfg();
    auto raw = generate_synthetic(tiny_task());
    Dataset data = prepare_dataset(cfg, raw, {}, {});
    Rng rng(4);
    ParamSet<float> params = init_params(cfg, data.vocab.size(), 4, rng);

    auto profile = smoothing_profile(cfg, params, data.dev, 4);
    REQUIRE(profile.size() == 5);  // layers 0..4
    for (int l = 0; l <= 4; ++l) {
        CHECK(profile[l].layer == l);
        CHECK(profile[l].mean >= 0.0);
        CHECK(profile[l].mean <= 2.0);
        CHECK(profile[l].stddev >= 0.0);
    }

    std::string csv = smoothing_csv(profile, "full");
    CHECK(csv.rfind("layer,mean_distance,std,variant\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 6);
    CHECK(csv.find(",full\n") != std::string::npos);

    std::vector<PreparedDoc> singletons;
    PreparedDoc d = data.dev[0];
    d.tokens = {d.tokens[0]};
    TextGraph g;
    g.tokens = {d.graph.tokens[0]};
    g.positions = {0};
    g.neighbors = {{}};
    d.graph = g;
    singletons.push_back(d);
    CHECK_THROWS_AS(smoothing_profile(cfg, params, singletons, 4), ContractError);
}

TEST_CASE("attention heatmap aligns scores to tokens") {
    DecodeResult dec;
    dec.labels = {0, 2};
    dec.attention = {{0.7, 0.2, 0.1}, {0.1, 0.1, 0.8}};
    std::vector<std::string> tokens{"red", "green", "blue"};

    auto heat = attention_heatmap(dec, tokens, 1);
    REQUIRE(heat.size() == 3);
    CHECK(heat[2].token == "blue");
    CHECK(heat[2].score == doctest::Approx(0.8));

    std::string js = heatmap_json(heat);
    CHECK(js.find("\"token\":\"green\"") != std::string::npos);
    CHECK(js.find("\"score\":0.8") != std::string::npos);

    CHECK_THROWS_AS(attention_heatmap(dec, tokens, 2), ContractError);
    std::vector<std::string> wrong{"a", "b"};
    CHECK_THROWS_AS(attention_heatmap(dec, wrong, 0), ContractError);
}

TEST_CASE("neighbor sweep trains per budget and reports a metric each") {
    TrainConfig cfg = tiny_cfg();
    auto raw = generate_synthetic(tiny_task());
    auto points = neighbor_sweep(cfg, raw, {}, {}, {2, 4});
    REQUIRE(points.size() == 2);
    CHECK(points[0].max_neighbors == 2);
    CHECK(points[1].max_neighbors == 4);
    for (const auto& p : points) {
        CHECK(p.metric >= 0.0);
        CHECK(p.metric <= 1.0);
    }
    std::string csv = sweep_csv(points);
    CHECK(csv.rfind("n,metric\n", 0) == 0);
    CHECK(std::count(csv.begin(), csv.end(), '\n') == 3);
}

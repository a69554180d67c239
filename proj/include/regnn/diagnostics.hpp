#pragma once

#include <string>
#include <vector>

#include "regnn/heads.hpp"
#include "regnn/training.hpp"

namespace regnn {

// Mean pairwise cosine distance (1 - cosine similarity) over all unordered
// pairs of rows.  A pair where either row has zero norm counts as maximally
// distant (distance 1) and is tallied separately so callers can warn.
struct CosineStats {
    double mean = 0.0;
    std::size_t zero_norm_pairs = 0;
};
CosineStats avg_cosine_distance(const std::vector<std::vector<float>>& rows);

// Per-layer hidden-state distance, averaged across documents.  Documents with
// fewer than two nodes have no pairs and are skipped; if every document is a
// singleton there is nothing to measure and this throws ContractError.
struct LayerDistance {
    int layer = 0;
    double mean = 0.0;
    double stddev = 0.0;
};
std::vector<LayerDistance> smoothing_profile(const TrainConfig& cfg,
                                             const ParamSet<float>& params,
                                             const std::vector<PreparedDoc>& docs,
                                             int max_layer);

// CSV rows "layer,mean_distance,std,variant" with a header line.
std::string smoothing_csv(const std::vector<LayerDistance>& profile,
                          const std::string& variant);

// Decoder attention at one emission step, aligned to the document tokens.
// Throws ContractError if `step` is past the end of the decode.
struct TokenScore {
    std::string token;
    double score = 0.0;
};
std::vector<TokenScore> attention_heatmap(const DecodeResult& decoded,
                                          const std::vector<std::string>& tokens,
                                          std::size_t step);
std::string heatmap_json(const std::vector<TokenScore>& heat);

// Retrain with each neighbor budget and report the test metric per value.
struct SweepPoint {
    int max_neighbors = 0;
    double metric = 0.0;
};
std::vector<SweepPoint> neighbor_sweep(TrainConfig cfg,
                                       const std::vector<RawDocument>& train,
                                       const std::vector<RawDocument>& dev,
                                       const std::vector<RawDocument>& test,
                                       const std::vector<int>& budgets);
std::string sweep_csv(const std::vector<SweepPoint>& points);

}  // namespace regnn

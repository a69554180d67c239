#include "regnn/diagnostics.hpp"

#include <cmath>
#include <sstream>

#include <json.hpp>

namespace regnn {

CosineStats avg_cosine_distance(const std::vector<std::vector<float>>& rows) {
    const std::size_t m = rows.size();
    if (m < 2) throw ContractError("avg_cosine_distance needs at least 2 rows, got " +
                                   std::to_string(m));
    std::vector<double> norms(m);
    for (std::size_t i = 0; i < m; ++i) {
        double s = 0.0;
        for (float x : rows[i]) s += static_cast<double>(x) * x;
        norms[i] = std::sqrt(s);
    }
    CosineStats out;
    double total = 0.0;
    for (std::size_t i = 0; i < m; ++i) {
        for (std::size_t j = i + 1; j < m; ++j) {
            if (norms[i] == 0.0 || norms[j] == 0.0) {
                total += 1.0;
                ++out.zero_norm_pairs;
                continue;
            }
            double dot = 0.0;
            for (std::size_t k = 0; k < rows[i].size(); ++k)
                dot += static_cast<double>(rows[i][k]) * rows[j][k];
            total += 1.0 - dot / (norms[i] * norms[j]);
        }
    }
    out.mean = total / (m * (m - 1) / 2.0);
    return out;
}

std::vector<LayerDistance> smoothing_profile(const TrainConfig& cfg,
                                             const ParamSet<float>& params,
                                             const std::vector<PreparedDoc>& docs,
                                             int max_layer) {
    if (max_layer < 1) throw ConfigError("smoothing_profile: max_layer must be >= 1");
    // Layer 0 (the input embeddings) is included, so max_layer + 1 rows.
    std::vector<std::vector<double>> per_layer(max_layer + 1);
    for (const auto& doc : docs) {
        if (doc.graph.tokens.size() < 2) continue;
        Tape<float> tape;
        auto bound = bind_params(tape, params, false);
        ModelGraph<float> mg(tape, doc.graph, bound, cfg);
        auto states = mg.run(max_layer);
        for (int l = 0; l <= max_layer; ++l) {
            std::vector<std::vector<float>> rows;
            rows.reserve(states[l].h.size());
            for (Var h : states[l].h) rows.push_back(tape.val(h).v);
            per_layer[l].push_back(avg_cosine_distance(rows).mean);
        }
    }
    if (per_layer[0].empty())
        throw ContractError("smoothing_profile: every document has fewer than 2 nodes");
    std::vector<LayerDistance> out;
    for (int l = 0; l <= max_layer; ++l) {
        MeanStd ms = mean_std(per_layer[l]);
        out.push_back({l, ms.mean, ms.stddev});
    }
    return out;
}

std::string smoothing_csv(const std::vector<LayerDistance>& profile,
                          const std::string& variant) {
    std::ostringstream out;
    out << "layer,mean_distance,std,variant\n";
    for (const auto& row : profile)
        out << row.layer << ',' << row.mean << ',' << row.stddev << ',' << variant << '\n';
    return out.str();
}

std::vector<TokenScore> attention_heatmap(const DecodeResult& decoded,
                                          const std::vector<std::string>& tokens,
                                          std::size_t step) {
    if (step >= decoded.attention.size())
        throw ContractError("attention_heatmap: step " + std::to_string(step) +
                            " past decode length " + std::to_string(decoded.attention.size()));
    const auto& scores = decoded.attention[step];
    if (scores.size() != tokens.size())
        throw ContractError("attention_heatmap: " + std::to_string(scores.size()) +
                            " scores for " + std::to_string(tokens.size()) + " tokens");
    std::vector<TokenScore> out;
    out.reserve(tokens.size());
    for (std::size_t i = 0; i < tokens.size(); ++i) out.push_back({tokens[i], scores[i]});
    return out;
}

std::string heatmap_json(const std::vector<TokenScore>& heat) {
    nlohmann::json arr = nlohmann::json::array();
    for (const auto& ts : heat) arr.push_back({{"token", ts.token}, {"score", ts.score}});
    return arr.dump();
}

std::vector<SweepPoint> neighbor_sweep(TrainConfig cfg,
                                       const std::vector<RawDocument>& train,
                                       const std::vector<RawDocument>& dev,
                                       const std::vector<RawDocument>& test,
                                       const std::vector<int>& budgets) {
    std::vector<SweepPoint> out;
    for (int n : budgets) {
        cfg.max_neighbors = n;  // graphs depend on the budget, so rebuild everything
        Dataset data = prepare_dataset(cfg, train, dev, test);
        TrainResult res = train_model(cfg, data);
        const auto& eval = data.test.empty() ? data.dev : data.test;
        out.push_back({n, dev_metric(cfg, res.best.params, eval,
                                     static_cast<int>(data.label_names.size()))});
    }
    return out;
}

std::string sweep_csv(const std::vector<SweepPoint>& points) {
    std::ostringstream out;
    out << "n,metric\n";
    for (const auto& p : points) out << p.max_neighbors << ',' << p.metric << '\n';
    return out.str();
}

}  // namespace regnn

#include "regnn/model.hpp"

#include <cmath>

namespace regnn {

namespace {

Tensor<float> uniform_init(int rows, int cols, int fan_in, Rng& rng) {
    Tensor<float> t(rows, cols);
    float bound = 1.0f / std::sqrt(static_cast<float>(fan_in));
    for (auto& x : t.v) x = static_cast<float>(rng.uniform(-bound, bound));
    return t;
}

}  // namespace

ParamSet<float> init_params(const ModelConfig& cfg, int vocab_size, int num_labels, Rng& rng) {
    ParamSet<float> p;
    int d = cfg.hidden;
    p.add("E_word", uniform_init(vocab_size, d, d, rng));
    if (cfg.use_positions) p.add("E_pos", uniform_init(cfg.max_len, d, d, rng));

    int wu = cfg.update_width();
    int copies = cfg.per_layer_params ? cfg.layers : 1;
    for (int l = 0; l < copies; ++l) {
        auto name = [&](const char* base) {
            return cfg.per_layer_params ? std::string(base) + "@" + std::to_string(l)
                                        : std::string(base);
        };
        for (const char* w : {"W_i", "W_f", "W_o", "W_u"}) p.add(name(w), uniform_init(wu, d, wu, rng));
        for (const char* b : {"b_i", "b_f", "b_o", "b_u"}) p.add(name(b), Tensor<float>(1, d));
        p.add(name("W_n"), uniform_init(cfg.agg_width(), d, cfg.agg_width(), rng));
        p.add(name("b_n"), Tensor<float>(1, d));
        p.add(name("u_n"), uniform_init(d, 1, d, rng));
        p.add(name("W_a"), uniform_init(d, d, d, rng));
        p.add(name("u_a"), uniform_init(d, 1, d, rng));
        if (!cfg.no_global) {
            for (const char* w : {"W_fg", "W_g", "W_og"})
                p.add(name(w), uniform_init(2 * d, d, 2 * d, rng));
            for (const char* b : {"b_fg", "b_g", "b_og"}) p.add(name(b), Tensor<float>(1, d));
        }
    }

    if (cfg.task == "single") {
        p.add("W_out", uniform_init(d, num_labels, d, rng));
    } else {
        p.add("E_lab", uniform_init(num_labels + 2, d, d, rng));
        for (const char* w : {"W_dl_i", "W_dl_f", "W_dl_o", "W_dl_u"})
            p.add(w, uniform_init(2 * d, d, 2 * d, rng));
        for (const char* b : {"b_dl_i", "b_dl_f", "b_dl_o", "b_dl_u"}) p.add(b, Tensor<float>(1, d));
        p.add("W_att", uniform_init(d, d, d, rng));
        p.add("W_dec", uniform_init(2 * d, num_labels + 1, 2 * d, rng));
        p.add("b_dec", Tensor<float>(1, num_labels + 1));
    }
    return p;
}

}  // namespace regnn

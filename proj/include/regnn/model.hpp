#pragma once

#include <algorithm>
#include <string>
#include <unordered_map>
#include <unordered_set>
#include <utility>
#include <vector>

#include "regnn/rng.hpp"
#include "regnn/tensor.hpp"
#include "regnn/textgraph.hpp"

namespace regnn {

struct ModelConfig {
    int hidden = 300;
    int layers = 6;
    int max_neighbors = 5;
    int window = 10;
    int min_count = 5;
    int max_len = 200;
    int max_labels = 8;
    bool use_positions = true;
    bool no_lstm = false;
    bool no_attention = false;
    bool no_global = false;
    bool per_layer_params = false;
    bool symmetrize = false;
    std::string task = "single";

    // Width of the [h; x; g; N] concatenation fed to the update and
    // aggregation weights; g drops out under the no-global variant.
    int update_width() const { return hidden * (no_global ? 3 : 4); }
    int agg_width() const { return update_width(); }
};

// Named parameter storage. Order is fixed at construction and defines the
// checkpoint tensor order.
template <class T>
struct ParamSet {
    std::vector<std::string> names;
    std::vector<Tensor<T>> values;
    std::unordered_map<std::string, int> index;

    void add(const std::string& name, Tensor<T> t) {
        index[name] = static_cast<int>(names.size());
        names.push_back(name);
        values.push_back(std::move(t));
    }
    bool has(const std::string& name) const { return index.count(name) > 0; }
    Tensor<T>& operator[](const std::string& name) { return values[index.at(name)]; }
    const Tensor<T>& operator[](const std::string& name) const { return values[index.at(name)]; }

    std::size_t scalar_count() const {
        std::size_t n = 0;
        for (const auto& t : values) n += t.size();
        return n;
    }

    template <class U>
    ParamSet<U> cast() const {
        ParamSet<U> out;
        for (std::size_t i = 0; i < names.size(); ++i)
            out.add(names[i], values[i].template cast<U>());
        return out;
    }
};

inline std::string layer_param(const std::string& base, int layer, const ModelConfig& cfg) {
    if (!cfg.per_layer_params) return base;
    return base + "@" + std::to_string(((layer - 1) % cfg.layers + cfg.layers) % cfg.layers);
}

// Uniform [-1/sqrt(fan_in), 1/sqrt(fan_in)] weights, zero biases.
ParamSet<float> init_params(const ModelConfig& cfg, int vocab_size, int num_labels, Rng& rng);

// A parameter set bound onto one tape as leaf variables.
template <class T>
struct BoundParams {
    const ParamSet<T>* set = nullptr;
    std::vector<Var> vars;

    Var operator()(const std::string& name) const { return vars[set->index.at(name)]; }
    Var at_layer(const std::string& base, int layer, const ModelConfig& cfg) const {
        return (*this)(layer_param(base, layer, cfg));
    }
};

template <class T>
BoundParams<T> bind_params(Tape<T>& tape, const ParamSet<T>& set, bool requires_grad,
                           const std::unordered_set<std::string>* frozen = nullptr) {
    BoundParams<T> b;
    b.set = &set;
    b.vars.reserve(set.values.size());
    for (std::size_t i = 0; i < set.values.size(); ++i) {
        bool rg = requires_grad && !(frozen && frozen->count(set.names[i]));
        b.vars.push_back(tape.leaf(set.values[i], rg));
    }
    return b;
}

// Hidden/cell variables of every node plus the graph-level pair at one layer.
struct StateVars {
    std::vector<Var> h;
    std::vector<Var> c;
    Var g;
    Var cg;
};

// Builds the ReGNN computation for one document on a tape. All node updates
// at layer l read only layer l-1 state, so within-layer order is immaterial.
template <class T>
class ModelGraph {
public:
    ModelGraph(Tape<T>& tape, const TextGraph& graph, const BoundParams<T>& params,
               const ModelConfig& cfg)
        : tape_(tape), graph_(graph), p_(params), cfg_(cfg) {
        int d = cfg.hidden;
        zero_ = tape_.constant(Tensor<T>(1, d));
        Var emb = p_("E_word");
        int vocab_rows = tape_.val(emb).rows;
        xs_.reserve(graph.size());
        for (int tok : graph.tokens) {
            if (tok < 0 || tok >= vocab_rows)
                throw ContractError("token id " + std::to_string(tok) + " outside embedding table");
            xs_.push_back(tape_.row(emb, tok));
        }
    }

    // Layer-0 state: h_i = x_i, c_i = 0, (g, c_g) from the global update run
    // over H^0 with all cells zero.
    StateVars init_state() {
        StateVars s;
        s.h = xs_;
        s.c.assign(xs_.size(), zero_);
        if (!cfg_.no_global) {
            StateVars seed = s;
            seed.g = zero_;
            seed.cg = zero_;
            auto [g, cg] = update_global(seed, 0);
            s.g = g;
            s.cg = cg;
        }
        return s;
    }

    // Eqns: P_k = h_k + p_k; alpha_j = u_n^T tanh(W_n [P_i; x_i; g; P_j] + b_n);
    // scores = softmax; N_i = sum score_k h_k. Zero neighbors give N_i = 0.
    Var aggregate(int i, const StateVars& prev, int layer) {
        const auto& nbrs = graph_.neighbors[i];
        if (nbrs.empty()) return zero_;
        if (cfg_.no_attention) {
            Var acc = tape_.add(zero_, prev.h[nbrs[0]]);
            for (std::size_t k = 1; k < nbrs.size(); ++k) acc = tape_.add(acc, prev.h[nbrs[k]]);
            return tape_.scale_const(acc, T(1) / static_cast<T>(nbrs.size()));
        }
        Var wn = p_.at_layer("W_n", layer, cfg_);
        Var bn = p_.at_layer("b_n", layer, cfg_);
        Var un = p_.at_layer("u_n", layer, cfg_);
        Var pi = positioned(prev.h[i], i);
        std::vector<Var> alphas;
        alphas.reserve(nbrs.size());
        for (int j : nbrs) {
            std::vector<Var> parts{pi, xs_[i]};
            if (!cfg_.no_global) parts.push_back(prev.g);
            parts.push_back(positioned(prev.h[j], j));
            Var pre = tape_.add(tape_.matmul(tape_.concat_cols(parts), wn), bn);
            alphas.push_back(tape_.matmul(tape_.tanh_(pre), un));
        }
        Var scores = tape_.softmax_row(tape_.concat_cols(alphas));
        last_agg_scores_ = scores;
        Var acc = tape_.scale(prev.h[nbrs[0]], tape_.slice_cols(scores, 0, 1));
        for (std::size_t k = 1; k < nbrs.size(); ++k)
            acc = tape_.add(acc, tape_.scale(prev.h[nbrs[k]],
                                             tape_.slice_cols(scores, static_cast<int>(k), 1)));
        return acc;
    }

    // LSTM-gated transition; under no-lstm, a plain tanh of the update
    // projection with no cell state.
    std::pair<Var, Var> update_node(int i, const StateVars& prev, Var agg, int layer) {
        std::vector<Var> parts{prev.h[i], xs_[i]};
        if (!cfg_.no_global) parts.push_back(prev.g);
        parts.push_back(agg);
        Var cat = tape_.concat_cols(parts);
        auto affine = [&](const char* w, const char* b) {
            return tape_.add(tape_.matmul(cat, p_.at_layer(w, layer, cfg_)),
                             p_.at_layer(b, layer, cfg_));
        };
        Var u = tape_.tanh_(affine("W_u", "b_u"));
        if (cfg_.no_lstm) return {u, zero_};
        Var ig = tape_.sigmoid(affine("W_i", "b_i"));
        Var fg = tape_.sigmoid(affine("W_f", "b_f"));
        Var og = tape_.sigmoid(affine("W_o", "b_o"));
        Var c = tape_.add(tape_.mul(fg, prev.c[i]), tape_.mul(ig, u));
        Var h = tape_.mul(og, tape_.tanh_(c));
        return {h, c};
    }

    // Attentive pooling to h-bar, per-node gates, coordinate-wise softmax
    // across the m+1 gate vectors, gated cell mix, g = o . tanh(c_g).
    std::pair<Var, Var> update_global(const StateVars& prev, int layer) {
        int m = static_cast<int>(prev.h.size());
        Var hbar = attentive_pool(prev.h, layer);
        auto gate = [&](Var other, const char* w, const char* b) {
            Var cat = tape_.concat_cols({prev.g, other});
            return tape_.sigmoid(tape_.add(tape_.matmul(cat, p_.at_layer(w, layer, cfg_)),
                                           p_.at_layer(b, layer, cfg_)));
        };
        std::vector<Var> pre;
        pre.reserve(m + 1);
        for (int i = 0; i < m; ++i) pre.push_back(gate(prev.h[i], "W_fg", "b_fg"));
        pre.push_back(gate(hbar, "W_g", "b_g"));
        Var o = gate(hbar, "W_og", "b_og");
        Var soft = tape_.softmax_cols(tape_.vstack(pre));
        last_gate_softmax_ = soft;
        // Without LSTM there are no cell states; the hidden states stand in.
        Var cg = tape_.mul(tape_.row(soft, m), cfg_.no_lstm ? prev.g : prev.cg);
        for (int i = 0; i < m; ++i)
            cg = tape_.add(cg, tape_.mul(tape_.row(soft, i), cfg_.no_lstm ? prev.h[i] : prev.c[i]));
        Var g = tape_.mul(o, tape_.tanh_(cg));
        return {g, cg};
    }

    // One state per layer 0..L; each layer refreshes the graph-level node
    // first, then aggregates and updates every node from layer l-1 values.
    std::vector<StateVars> run(int L) {
        if (L < 1) throw ConfigError("layer count must be >= 1, got " + std::to_string(L));
        std::vector<StateVars> states;
        states.reserve(L + 1);
        states.push_back(init_state());
        for (int l = 1; l <= L; ++l) {
            const StateVars& prev = states.back();
            StateVars next;
            if (!cfg_.no_global) {
                auto [g, cg] = update_global(prev, l);
                next.g = g;
                next.cg = cg;
            }
            int m = graph_.size();
            next.h.resize(m);
            next.c.resize(m);
            for (int i = 0; i < m; ++i) {
                Var agg = aggregate(i, prev, l);
                auto [h, c] = update_node(i, prev, agg, l);
                next.h[i] = h;
                next.c[i] = c;
            }
            states.push_back(std::move(next));
        }
        return states;
    }

    // Attentive pooling over a set of hidden states (Eq. 12-14 form); also the
    // document readout under the no-global variant.
    Var attentive_pool(const std::vector<Var>& hs, int layer) {
        if (hs.size() == 1) return hs[0];
        Var wa = p_.at_layer("W_a", layer, cfg_);
        Var ua = p_.at_layer("u_a", layer, cfg_);
        std::vector<Var> alphas;
        alphas.reserve(hs.size());
        for (Var h : hs) alphas.push_back(tape_.matmul(tape_.tanh_(tape_.matmul(h, wa)), ua));
        Var scores = tape_.softmax_row(tape_.concat_cols(alphas));
        last_pool_scores_ = scores;
        Var acc = tape_.scale(hs[0], tape_.slice_cols(scores, 0, 1));
        for (std::size_t k = 1; k < hs.size(); ++k)
            acc = tape_.add(acc, tape_.scale(hs[k], tape_.slice_cols(scores, static_cast<int>(k), 1)));
        return acc;
    }

    // Document vector for the classifier: g^L, or attentive pooling of h^L
    // when the global node is ablated.
    Var readout(const std::vector<StateVars>& states) {
        const StateVars& last = states.back();
        if (cfg_.no_global) return attentive_pool(last.h, static_cast<int>(states.size()) - 1);
        return last.g;
    }

    const std::vector<Var>& embeddings() const { return xs_; }
    Var zero() const { return zero_; }

    // Most recent attention/gate distributions, for normalization checks.
    Var last_agg_scores() const { return last_agg_scores_; }
    Var last_pool_scores() const { return last_pool_scores_; }
    Var last_gate_softmax() const { return last_gate_softmax_; }

private:
    Var positioned(Var h, int node) {
        if (!cfg_.use_positions) return h;
        int pos = std::min(graph_.positions[node], cfg_.max_len - 1);
        return tape_.add(h, tape_.row(p_("E_pos"), pos));
    }

    Tape<T>& tape_;
    const TextGraph& graph_;
    const BoundParams<T>& p_;
    const ModelConfig& cfg_;
    std::vector<Var> xs_;
    Var zero_;
    Var last_agg_scores_;
    Var last_pool_scores_;
    Var last_gate_softmax_;
};

}  // namespace regnn

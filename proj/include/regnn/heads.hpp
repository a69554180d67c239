#pragma once

#include <set>
#include <vector>

#include "regnn/model.hpp"
#include "regnn/tensor.hpp"

namespace regnn {

template <class T>
int argmax_index(const Tensor<T>& row) {
    int best = 0;
    for (int j = 1; j < row.cols; ++j)
        if (row.v[j] > row.v[best]) best = j;  // ties keep the smaller index
    return best;
}

template <class T>
Var single_logits(Tape<T>& tape, Var doc_vec, const BoundParams<T>& p) {
    return tape.matmul(doc_vec, p("W_out"));
}

template <class T>
int classify_single(Tape<T>& tape, Var doc_vec, const BoundParams<T>& p) {
    return argmax_index(tape.val(single_logits(tape, doc_vec, p)));
}

// Multi-label decoding. Label ids are 0..K-1; the output vocabulary appends
// END at index K; the embedding table appends START at K and END at K+1.
struct DecodeResult {
    std::vector<int> labels;
    std::vector<std::vector<double>> attention;  // per emitted step, per node
};

namespace detail {

template <class T>
struct DecoderStep {
    Var t, cell, logits, attention;
};

template <class T>
DecoderStep<T> decoder_step(Tape<T>& tape, Var t_prev, Var c_prev, Var input_emb,
                            const std::vector<Var>& node_states, const BoundParams<T>& p) {
    Var cat = tape.concat_cols({t_prev, input_emb});
    auto affine = [&](const char* w, const char* b) {
        return tape.add(tape.matmul(cat, p(w)), p(b));
    };
    Var ig = tape.sigmoid(affine("W_dl_i", "b_dl_i"));
    Var fg = tape.sigmoid(affine("W_dl_f", "b_dl_f"));
    Var og = tape.sigmoid(affine("W_dl_o", "b_dl_o"));
    Var u = tape.tanh_(affine("W_dl_u", "b_dl_u"));
    Var cell = tape.add(tape.mul(fg, c_prev), tape.mul(ig, u));
    Var t = tape.mul(og, tape.tanh_(cell));

    // Bilinear attention over the final node states: delta(t, h) = t W_att h.
    Var q = tape.matmul(t, p("W_att"));
    std::vector<Var> alphas;
    alphas.reserve(node_states.size());
    for (Var h : node_states) alphas.push_back(tape.dot(q, h));
    Var scores = tape.softmax_row(tape.concat_cols(alphas));
    Var ctx = tape.scale(node_states[0], tape.slice_cols(scores, 0, 1));
    for (std::size_t k = 1; k < node_states.size(); ++k)
        ctx = tape.add(ctx, tape.scale(node_states[k],
                                       tape.slice_cols(scores, static_cast<int>(k), 1)));
    Var logits = tape.add(tape.matmul(tape.concat_cols({t, ctx}), p("W_dec")), p("b_dec"));
    return {t, cell, logits, scores};
}

}  // namespace detail

// Greedy decode: start from t_0 = g^L, mask already-emitted labels, stop at
// END or after max_labels emissions.
template <class T>
DecodeResult decode_greedy(Tape<T>& tape, Var doc_vec, const std::vector<Var>& node_states,
                           const BoundParams<T>& p, int num_labels, int max_labels) {
    if (node_states.empty()) throw ContractError("decode over zero node states");
    int d = tape.val(doc_vec).cols;
    Var t = doc_vec;
    Var cell = tape.constant(Tensor<T>(1, d));
    Var emb = p("E_lab");
    int prev = num_labels;  // START row
    DecodeResult out;
    std::vector<bool> emitted(num_labels, false);
    while (static_cast<int>(out.labels.size()) < max_labels) {
        auto step = detail::decoder_step(tape, t, cell, tape.row(emb, prev), node_states, p);
        Tensor<T> mask(1, num_labels + 1);
        for (int j = 0; j < num_labels; ++j)
            if (emitted[j]) mask.v[j] = T(-1e30);
        Var masked = tape.add(step.logits, tape.constant(std::move(mask)));
        int pick = argmax_index(tape.val(masked));
        const auto& attn = tape.val(step.attention).v;
        out.attention.emplace_back(attn.begin(), attn.end());
        if (pick == num_labels) break;  // END
        out.labels.push_back(pick);
        emitted[pick] = true;
        t = step.t;
        cell = step.cell;
        prev = pick;
    }
    return out;
}

// Teacher-forced decoding loss: gold labels feed the next step; mean per-step
// cross entropy including the END step. Gold is capped at max_labels.
template <class T>
Var decode_teacher_loss(Tape<T>& tape, Var doc_vec, const std::vector<Var>& node_states,
                        const BoundParams<T>& p, const std::vector<int>& gold, int num_labels,
                        int max_labels) {
    if (node_states.empty()) throw ContractError("decode over zero node states");
    int d = tape.val(doc_vec).cols;
    Var t = doc_vec;
    Var cell = tape.constant(Tensor<T>(1, d));
    Var emb = p("E_lab");
    std::vector<int> targets(gold.begin(),
                             gold.begin() + std::min<std::size_t>(gold.size(), max_labels));
    targets.push_back(num_labels);  // END
    int prev = num_labels;          // START row
    Var total;
    for (std::size_t s = 0; s < targets.size(); ++s) {
        auto step = detail::decoder_step(tape, t, cell, tape.row(emb, prev), node_states, p);
        Var ce = tape.cross_entropy(step.logits, targets[s]);
        total = s == 0 ? ce : tape.add(total, ce);
        t = step.t;
        cell = step.cell;
        prev = targets[s];
    }
    return tape.scale_const(total, T(1) / static_cast<T>(targets.size()));
}

struct MultiLabelMetrics {
    double precision = 0.0;
    double recall = 0.0;
    double f1 = 0.0;
};

// Micro-averaged precision/recall/F1 over label sets; zero denominators give
// zero by convention.
inline MultiLabelMetrics evaluate_multilabel(const std::vector<std::vector<int>>& pred,
                                             const std::vector<std::vector<int>>& gold) {
    if (pred.size() != gold.size())
        throw ContractError("evaluate_multilabel: " + std::to_string(pred.size()) +
                            " predictions vs " + std::to_string(gold.size()) + " golds");
    long long tp = 0, np = 0, ng = 0;
    for (std::size_t i = 0; i < pred.size(); ++i) {
        std::set<int> ps(pred[i].begin(), pred[i].end());
        std::set<int> gs(gold[i].begin(), gold[i].end());
        np += static_cast<long long>(ps.size());
        ng += static_cast<long long>(gs.size());
        for (int x : ps) tp += gs.count(x);
    }
    MultiLabelMetrics m;
    m.precision = np == 0 ? 0.0 : static_cast<double>(tp) / np;
    m.recall = ng == 0 ? 0.0 : static_cast<double>(tp) / ng;
    m.f1 = (m.precision + m.recall) == 0.0 ? 0.0
                                           : 2.0 * m.precision * m.recall / (m.precision + m.recall);
    return m;
}

}  // namespace regnn

#include "regnn/training.hpp"

#include <algorithm>
#include <atomic>
#include <cmath>
#include <fstream>
#include <sstream>
#include <thread>
#include <unordered_map>

namespace regnn {

void to_json(nlohmann::json& j, const TrainConfig& c) {
    j = {{"hidden", c.hidden},
         {"layers", c.layers},
         {"max_neighbors", c.max_neighbors},
         {"window", c.window},
         {"min_count", c.min_count},
         {"max_len", c.max_len},
         {"max_labels", c.max_labels},
         {"use_positions", c.use_positions},
         {"no_lstm", c.no_lstm},
         {"no_attention", c.no_attention},
         {"no_global", c.no_global},
         {"per_layer_params", c.per_layer_params},
         {"symmetrize", c.symmetrize},
         {"task", c.task},
         {"lr0", c.lr0},
         {"lr_decay", c.lr_decay},
         {"epochs", c.epochs},
         {"batch_size", c.batch_size},
         {"seed", c.seed},
         {"grad_clip", c.grad_clip},
         {"freeze_embeddings", c.freeze_embeddings},
         {"workers", c.workers},
         {"dev_fraction", c.dev_fraction}};
}

void from_json(const nlohmann::json& j, TrainConfig& c) {
    TrainConfig d;
    auto get = [&](const char* k, auto& field, auto dflt) {
        field = j.value(k, dflt);
    };
    get("hidden", c.hidden, d.hidden);
    get("layers", c.layers, d.layers);
    get("max_neighbors", c.max_neighbors, d.max_neighbors);
    get("window", c.window, d.window);
    get("min_count", c.min_count, d.min_count);
    get("max_len", c.max_len, d.max_len);
    get("max_labels", c.max_labels, d.max_labels);
    get("use_positions", c.use_positions, d.use_positions);
    get("no_lstm", c.no_lstm, d.no_lstm);
    get("no_attention", c.no_attention, d.no_attention);
    get("no_global", c.no_global, d.no_global);
    get("per_layer_params", c.per_layer_params, d.per_layer_params);
    get("symmetrize", c.symmetrize, d.symmetrize);
    get("task", c.task, d.task);
    get("lr0", c.lr0, d.lr0);
    get("lr_decay", c.lr_decay, d.lr_decay);
    get("epochs", c.epochs, d.epochs);
    get("batch_size", c.batch_size, d.batch_size);
    get("seed", c.seed, d.seed);
    get("grad_clip", c.grad_clip, d.grad_clip);
    get("freeze_embeddings", c.freeze_embeddings, d.freeze_embeddings);
    get("workers", c.workers, d.workers);
    get("dev_fraction", c.dev_fraction, d.dev_fraction);
}

namespace {

TokenizerOptions tok_options(const TrainConfig& cfg) {
    TokenizerOptions opt;
    opt.window = cfg.window;
    opt.max_len = cfg.max_len;
    return opt;
}

std::vector<int> map_labels(const std::vector<std::string>& doc_labels,
                            const std::unordered_map<std::string, int>& label_ids) {
    std::vector<int> out;
    for (const auto& l : doc_labels) {
        auto it = label_ids.find(l);
        if (it != label_ids.end()) out.push_back(it->second);
    }
    return out;
}

std::vector<PreparedDoc> build_docs(const TrainConfig& cfg, const std::vector<RawDocument>& docs,
                                    const Vocab& vocab,
                                    const std::unordered_map<std::string, int>& label_ids,
                                    const PmiTable& pmi) {
    std::vector<PreparedDoc> out;
    for (const auto& raw : docs) {
        Tokenized tok = tokenize(raw.text, tok_options(cfg));
        if (tok.tokens.empty()) continue;
        PreparedDoc d;
        for (const auto& t : tok.tokens) d.tokens.push_back(vocab.id(t));
        d.graph = build_graph(d.tokens, pmi, cfg.max_neighbors, cfg.symmetrize);
        d.labels = map_labels(raw.labels, label_ids);
        out.push_back(std::move(d));
    }
    return out;
}

using GradBuffer = std::vector<Tensor<float>>;

GradBuffer zero_like(const ParamSet<float>& params) {
    GradBuffer g;
    g.reserve(params.values.size());
    for (const auto& t : params.values) g.emplace_back(t.rows, t.cols);
    return g;
}

// Forward + backward for one document; returns the loss value.
double doc_gradient(const TrainConfig& cfg, const ParamSet<float>& params, const PreparedDoc& doc,
                    int num_labels, const std::unordered_set<std::string>* frozen, GradBuffer* out) {
    Tape<float> tape;
    auto bound = bind_params(tape, params, out != nullptr, frozen);
    ModelGraph<float> mg(tape, doc.graph, bound, cfg);
    auto states = mg.run(cfg.layers);
    Var doc_vec = mg.readout(states);
    Var loss;
    if (cfg.task == "single") {
        if (doc.labels.empty()) throw ContractError("single-label document without a label");
        loss = tape.cross_entropy(single_logits(tape, doc_vec, bound), doc.labels[0]);
    } else {
        loss = decode_teacher_loss(tape, doc_vec, states.back().h, bound, doc.labels, num_labels,
                                   cfg.max_labels);
    }
    if (out) {
        tape.backward(loss);
        for (std::size_t i = 0; i < bound.vars.size(); ++i)
            if (tape.requires_grad(bound.vars[i])) {
                const auto& g = tape.grad(bound.vars[i]);
                auto& acc = (*out)[i];
                for (std::size_t k = 0; k < g.v.size(); ++k) acc.v[k] += g.v[k];
            }
    }
    return tape.val(loss).v[0];
}

}  // namespace

Dataset prepare_dataset(const TrainConfig& cfg, const std::vector<RawDocument>& train,
                        const std::vector<RawDocument>& dev, const std::vector<RawDocument>& test) {
    if (train.empty()) throw IngestError("training corpus is empty");

    std::vector<std::vector<std::string>> train_tokens;
    for (const auto& d : train) train_tokens.push_back(tokenize(d.text, tok_options(cfg)).tokens);
    Dataset out;
    out.vocab = Vocab::build(train_tokens, cfg.min_count);

    std::unordered_map<std::string, int> label_ids;
    for (const auto& d : train)
        for (const auto& l : d.labels)
            if (!label_ids.count(l)) {
                label_ids[l] = static_cast<int>(out.label_names.size());
                out.label_names.push_back(l);
            }

    PmiTable pmi = count_pmi(cfg, {&train, &dev, &test}, out.vocab);

    std::vector<PreparedDoc> all_train = build_docs(cfg, train, out.vocab, label_ids, pmi);
    if (!dev.empty()) {
        out.train = std::move(all_train);
        out.dev = build_docs(cfg, dev, out.vocab, label_ids, pmi);
    } else {
        // Seeded split: the last dev_fraction of a seeded permutation.
        Rng rng(cfg.seed ^ 0x5eedu);
        std::vector<std::size_t> order(all_train.size());
        for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;
        rng.shuffle(order);
        std::size_t ndev = std::max<std::size_t>(
            1, static_cast<std::size_t>(all_train.size() * cfg.dev_fraction));
        for (std::size_t i = 0; i < order.size(); ++i) {
            auto& dst = i < order.size() - ndev ? out.train : out.dev;
            dst.push_back(std::move(all_train[order[i]]));
        }
    }
    out.test = build_docs(cfg, test, out.vocab, label_ids, pmi);
    return out;
}

PmiTable count_pmi(const TrainConfig& cfg, const std::vector<const std::vector<RawDocument>*>& sets,
                   const Vocab& vocab) {
    PmiTable pmi;
    for (const auto* set : sets)
        for (const auto& d : *set) {
            Tokenized tok = tokenize(d.text, tok_options(cfg));
            for (const auto& span : tok.spans) {
                std::vector<int> ids;
                ids.reserve(span.size());
                for (const auto& t : span) ids.push_back(vocab.id(t));
                pmi.add_span(ids);
            }
        }
    return pmi;
}

std::vector<PreparedDoc> prepare_docs(const TrainConfig& cfg, const std::vector<RawDocument>& docs,
                                      const Vocab& vocab, const std::vector<std::string>& labels,
                                      const PmiTable& pmi) {
    std::unordered_map<std::string, int> label_ids;
    for (std::size_t i = 0; i < labels.size(); ++i) label_ids[labels[i]] = static_cast<int>(i);
    return build_docs(cfg, docs, vocab, label_ids, pmi);
}

Adam::Adam(const ParamSet<float>& shape, double beta1, double beta2, double eps)
    : names_(shape.names), beta1_(beta1), beta2_(beta2), eps_(eps) {
    for (const auto& t : shape.values) {
        m_.emplace_back(t.rows, t.cols);
        v_.emplace_back(t.rows, t.cols);
    }
}

void Adam::step(ParamSet<float>& params, const std::vector<Tensor<float>>& grads, double lr) {
    ++steps_;
    double bc1 = 1.0 - std::pow(beta1_, static_cast<double>(steps_));
    double bc2 = 1.0 - std::pow(beta2_, static_cast<double>(steps_));
    for (std::size_t p = 0; p < params.values.size(); ++p) {
        auto& w = params.values[p].v;
        const auto& g = grads[p].v;
        auto& m = m_[p].v;
        auto& v = v_[p].v;
        for (std::size_t i = 0; i < w.size(); ++i) {
            if (!std::isfinite(g[i]))
                throw NumericError("non-finite gradient in parameter " + names_[p]);
            m[i] = static_cast<float>(beta1_ * m[i] + (1.0 - beta1_) * g[i]);
            v[i] = static_cast<float>(beta2_ * v[i] + (1.0 - beta2_) * g[i] * g[i]);
            double mhat = m[i] / bc1;
            double vhat = v[i] / bc2;
            w[i] -= static_cast<float>(lr * mhat / (std::sqrt(vhat) + eps_));
        }
    }
}

double evaluate_accuracy(const TrainConfig& cfg, const ParamSet<float>& params,
                         const std::vector<PreparedDoc>& docs) {
    if (docs.empty()) return 0.0;
    long long hits = 0;
    for (const auto& doc : docs) {
        Tape<float> tape;
        auto bound = bind_params(tape, params, false);
        ModelGraph<float> mg(tape, doc.graph, bound, cfg);
        auto states = mg.run(cfg.layers);
        int pred = classify_single(tape, mg.readout(states), bound);
        if (!doc.labels.empty() && pred == doc.labels[0]) ++hits;
    }
    return static_cast<double>(hits) / static_cast<double>(docs.size());
}

MultiLabelMetrics evaluate_multi(const TrainConfig& cfg, const ParamSet<float>& params,
                                 const std::vector<PreparedDoc>& docs, int num_labels,
                                 std::vector<std::vector<int>>* predictions) {
    std::vector<std::vector<int>> pred, gold;
    for (const auto& doc : docs) {
        Tape<float> tape;
        auto bound = bind_params(tape, params, false);
        ModelGraph<float> mg(tape, doc.graph, bound, cfg);
        auto states = mg.run(cfg.layers);
        auto res = decode_greedy(tape, mg.readout(states), states.back().h, bound, num_labels,
                                 cfg.max_labels);
        pred.push_back(res.labels);
        gold.push_back(doc.labels);
    }
    if (predictions) *predictions = pred;
    return evaluate_multilabel(pred, gold);
}

double dev_metric(const TrainConfig& cfg, const ParamSet<float>& params,
                  const std::vector<PreparedDoc>& docs, int num_labels) {
    if (cfg.task == "single") return evaluate_accuracy(cfg, params, docs);
    return evaluate_multi(cfg, params, docs, num_labels).f1;
}

double dataset_loss(const TrainConfig& cfg, const ParamSet<float>& params,
                    const std::vector<PreparedDoc>& docs, int num_labels) {
    if (docs.empty()) return 0.0;
    double total = 0.0;
    for (const auto& doc : docs) total += doc_gradient(cfg, params, doc, num_labels, nullptr, nullptr);
    return total / static_cast<double>(docs.size());
}

TrainResult train_model(const TrainConfig& cfg, const Dataset& data,
                        const ParamSet<float>* initial) {
    if (data.dev.empty()) throw ConfigError("dev set is empty; training needs model selection data");
    if (data.train.empty()) throw ConfigError("train set is empty");
    int num_labels = static_cast<int>(data.label_names.size());

    Rng rng(cfg.seed);
    ParamSet<float> params =
        initial ? *initial : init_params(cfg, data.vocab.size(), num_labels, rng);
    Adam opt(params);
    std::unordered_set<std::string> frozen;
    if (cfg.freeze_embeddings) frozen.insert("E_word");

    Rng shuffle_rng = rng.split();
    TrainResult result;
    std::vector<std::size_t> order(data.train.size());
    for (std::size_t i = 0; i < order.size(); ++i) order[i] = i;

    int workers = std::max(1, cfg.workers);
    ParamSet<float> best_params;

    for (int epoch = 0; epoch < cfg.epochs; ++epoch) {
        double lr = cfg.lr0 * std::pow(cfg.lr_decay, epoch);
        shuffle_rng.shuffle(order);

        double epoch_loss = 0.0;
        for (std::size_t start = 0; start < order.size(); start += cfg.batch_size) {
            std::size_t end = std::min(order.size(), start + cfg.batch_size);
            std::size_t count = end - start;
            std::vector<GradBuffer> buffers(count);
            std::vector<double> losses(count, 0.0);

            auto work = [&](std::size_t k) {
                buffers[k] = zero_like(params);
                losses[k] = doc_gradient(cfg, params, data.train[order[start + k]], num_labels,
                                         &frozen, &buffers[k]);
            };
            if (workers == 1 || count == 1) {
                for (std::size_t k = 0; k < count; ++k) work(k);
            } else {
                std::atomic<std::size_t> next{0};
                std::vector<std::thread> pool;
                for (int w = 0; w < std::min<std::size_t>(workers, count); ++w)
                    pool.emplace_back([&] {
                        for (std::size_t k = next.fetch_add(1); k < count; k = next.fetch_add(1))
                            work(k);
                    });
                for (auto& t : pool) t.join();
            }

            // Merge per-document buffers in document order (worker-count
            // independent result), averaging over the batch.
            GradBuffer grads = std::move(buffers[0]);
            for (std::size_t k = 1; k < count; ++k)
                for (std::size_t p = 0; p < grads.size(); ++p)
                    for (std::size_t i = 0; i < grads[p].v.size(); ++i)
                        grads[p].v[i] += buffers[k][p].v[i];
            float inv = 1.0f / static_cast<float>(count);
            for (auto& g : grads)
                for (auto& x : g.v) x *= inv;
            for (double l : losses) epoch_loss += l;

            if (cfg.grad_clip > 0.0) {
                double norm2 = 0.0;
                for (const auto& g : grads)
                    for (float x : g.v) norm2 += static_cast<double>(x) * x;
                double norm = std::sqrt(norm2);
                if (norm > cfg.grad_clip) {
                    float f = static_cast<float>(cfg.grad_clip / norm);
                    for (auto& g : grads)
                        for (auto& x : g.v) x *= f;
                }
            }
            opt.step(params, grads, lr);
        }

        double metric = dev_metric(cfg, params, data.dev, num_labels);
        result.log.push_back(
            {epoch, lr, epoch_loss / static_cast<double>(data.train.size()), metric});
        if (result.best_epoch < 0 || metric > result.best_dev_metric) {
            result.best_dev_metric = metric;
            result.best_epoch = epoch;
            best_params = params;
        }
    }

    result.best = make_checkpoint(cfg, best_params, data.vocab, data.label_names);
    result.best.header["best_epoch"] = result.best_epoch;
    result.best.header["best_dev_metric"] = result.best_dev_metric;
    return result;
}

double load_embeddings(const std::string& path, const Vocab& vocab, ParamSet<float>& params) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open embedding file: " + path);
    Tensor<float>& table = params["E_word"];
    int d = table.cols;
    std::string line;
    long long covered = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::istringstream ss(line);
        std::string token;
        ss >> token;
        int id = vocab.id(token);
        if (id == Vocab::kUnk && token != vocab.token(Vocab::kUnk)) {
            // Not in vocab; still validate the width on the first line.
            continue;
        }
        std::vector<float> row;
        float x;
        while (ss >> x) row.push_back(x);
        if (static_cast<int>(row.size()) != d)
            throw ConfigError("embedding width " + std::to_string(row.size()) +
                              " does not match hidden size " + std::to_string(d));
        for (int j = 0; j < d; ++j) table.at(id, j) = row[j];
        ++covered;
    }
    int real_tokens = vocab.size() - 4;
    return real_tokens <= 0 ? 0.0
                            : static_cast<double>(covered) / static_cast<double>(real_tokens);
}

Checkpoint make_checkpoint(const TrainConfig& cfg, const ParamSet<float>& params,
                           const Vocab& vocab, const std::vector<std::string>& labels) {
    Checkpoint ckpt;
    ckpt.params = params;
    ckpt.header["config"] = cfg;
    ckpt.header["seed"] = cfg.seed;
    ckpt.header["vocab"] = vocab.tokens();
    ckpt.header["labels"] = labels;
    return ckpt;
}

TrainConfig config_from_header(const nlohmann::json& header) {
    return header.at("config").get<TrainConfig>();
}

Vocab vocab_from_header(const nlohmann::json& header) {
    return Vocab::from_tokens(header.at("vocab").get<std::vector<std::string>>());
}

std::vector<std::string> labels_from_header(const nlohmann::json& header) {
    return header.at("labels").get<std::vector<std::string>>();
}

MeanStd mean_std(const std::vector<double>& xs) {
    MeanStd out;
    if (xs.empty()) return out;
    for (double x : xs) out.mean += x;
    out.mean /= static_cast<double>(xs.size());
    if (xs.size() > 1) {
        double acc = 0.0;
        for (double x : xs) acc += (x - out.mean) * (x - out.mean);
        out.stddev = std::sqrt(acc / static_cast<double>(xs.size() - 1));
    }
    return out;
}

std::vector<double> multi_seed_metrics(TrainConfig cfg, const std::vector<RawDocument>& train,
                                       const std::vector<RawDocument>& dev,
                                       const std::vector<RawDocument>& test, int runs) {
    std::vector<double> metrics;
    for (int r = 0; r < runs; ++r) {
        TrainConfig run_cfg = cfg;
        run_cfg.seed = cfg.seed + static_cast<std::uint64_t>(r);
        Dataset data = prepare_dataset(run_cfg, train, dev, test);
        TrainResult res = train_model(run_cfg, data);
        metrics.push_back(dev_metric(run_cfg, res.best.params, data.test,
                                     static_cast<int>(data.label_names.size())));
    }
    return metrics;
}

}  // namespace regnn

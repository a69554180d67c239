#pragma once

#include <cstdint>
#include <optional>
#include <string>
#include <vector>

#include <json.hpp>

#include "regnn/checkpoint.hpp"
#include "regnn/heads.hpp"
#include "regnn/model.hpp"
#include "regnn/textgraph.hpp"

namespace regnn {

struct TrainConfig : ModelConfig {
    double lr0 = 0.001;
    double lr_decay = 0.5;  // per epoch
    int epochs = 20;
    int batch_size = 10;
    std::uint64_t seed = 1;
    double grad_clip = 0.0;  // global max-norm, 0 disables
    bool freeze_embeddings = false;
    int workers = 1;
    double dev_fraction = 0.1;  // used when no dev file is supplied
};

void to_json(nlohmann::json& j, const TrainConfig& c);
void from_json(const nlohmann::json& j, TrainConfig& c);

struct PreparedDoc {
    std::vector<int> tokens;
    TextGraph graph;
    std::vector<int> labels;
};

struct Dataset {
    Vocab vocab;
    std::vector<std::string> label_names;
    std::vector<PreparedDoc> train, dev, test;
};

// Tokenizes everything, builds vocab and label set from the training split,
// counts PMI spans over all supplied text, builds per-document graphs. When
// dev is empty, a seeded dev_fraction of train is split off.
Dataset prepare_dataset(const TrainConfig& cfg, const std::vector<RawDocument>& train,
                        const std::vector<RawDocument>& dev, const std::vector<RawDocument>& test);

// Document preparation against a fixed vocabulary (checkpoint evaluation).
// `pmi_source` supplies the span statistics; unknown labels are dropped.
std::vector<PreparedDoc> prepare_docs(const TrainConfig& cfg, const std::vector<RawDocument>& docs,
                                      const Vocab& vocab, const std::vector<std::string>& labels,
                                      const PmiTable& pmi);

PmiTable count_pmi(const TrainConfig& cfg, const std::vector<const std::vector<RawDocument>*>& sets,
                   const Vocab& vocab);

// Bias-corrected Adam with the usual beta/epsilon defaults.
class Adam {
public:
    explicit Adam(const ParamSet<float>& shape, double beta1 = 0.9, double beta2 = 0.999,
                  double eps = 1e-8);
    void step(ParamSet<float>& params, const std::vector<Tensor<float>>& grads, double lr);
    long long step_count() const { return steps_; }

private:
    std::vector<Tensor<float>> m_, v_;
    std::vector<std::string> names_;
    double beta1_, beta2_, eps_;
    long long steps_ = 0;
};

struct EpochLog {
    int epoch;
    double lr;
    double train_loss;
    double dev_metric;
};

struct TrainResult {
    Checkpoint best;
    std::vector<EpochLog> log;
    int best_epoch = -1;
    double best_dev_metric = 0.0;
};

// Per-epoch: seeded shuffle, gradient accumulation over batch_size documents
// per optimizer step, lr0 * lr_decay^epoch, dev evaluation; the checkpoint
// with the best dev metric (accuracy or micro-F1) is retained.
// `initial` overrides the seeded parameter init (pre-trained embeddings).
TrainResult train_model(const TrainConfig& cfg, const Dataset& data,
                        const ParamSet<float>* initial = nullptr);

double evaluate_accuracy(const TrainConfig& cfg, const ParamSet<float>& params,
                         const std::vector<PreparedDoc>& docs);
MultiLabelMetrics evaluate_multi(const TrainConfig& cfg, const ParamSet<float>& params,
                                 const std::vector<PreparedDoc>& docs, int num_labels,
                                 std::vector<std::vector<int>>* predictions = nullptr);
// Accuracy for single-label, micro-F1 for multi-label.
double dev_metric(const TrainConfig& cfg, const ParamSet<float>& params,
                  const std::vector<PreparedDoc>& docs, int num_labels);

// Mean per-document loss without updating anything.
double dataset_loss(const TrainConfig& cfg, const ParamSet<float>& params,
                    const std::vector<PreparedDoc>& docs, int num_labels);

// Text word-vector file: `token v1 ... vd`. Rows present in the file replace
// the corresponding embedding rows; returns the covered vocab fraction.
double load_embeddings(const std::string& path, const Vocab& vocab, ParamSet<float>& params);

Checkpoint make_checkpoint(const TrainConfig& cfg, const ParamSet<float>& params,
                           const Vocab& vocab, const std::vector<std::string>& labels);
TrainConfig config_from_header(const nlohmann::json& header);
Vocab vocab_from_header(const nlohmann::json& header);
std::vector<std::string> labels_from_header(const nlohmann::json& header);

struct MeanStd {
    double mean = 0.0;
    double stddev = 0.0;  // sample standard deviation
};
MeanStd mean_std(const std::vector<double>& xs);

// Full train+test pipeline per seed (seed, seed+1, ...); returns the test
// metric of each run.
std::vector<double> multi_seed_metrics(TrainConfig cfg, const std::vector<RawDocument>& train,
                                       const std::vector<RawDocument>& dev,
                                       const std::vector<RawDocument>& test, int runs);

}  // namespace regnn

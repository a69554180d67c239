#include <cstdlib>
#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <sstream>
#include <string>
#include <vector>

#include <CLI11.hpp>
#include <json.hpp>

#include "regnn/diagnostics.hpp"
#include "regnn/heads.hpp"
#include "regnn/training.hpp"

namespace fs = std::filesystem;
using nlohmann::json;
using namespace regnn;

namespace {

// Tracks every artifact a subcommand writes so a failure part-way through
// leaves nothing behind.
class OutputGuard {
public:
    ~OutputGuard() {
        if (committed_) return;
        for (const auto& p : written_) {
            std::error_code ec;
            fs::remove(p, ec);
        }
    }
    fs::path track(const fs::path& p) {
        written_.push_back(p);
        return p;
    }
    void write_text(const fs::path& p, const std::string& body) {
        std::ofstream out(track(p), std::ios::binary);
        if (!out) throw IoError("cannot write " + p.string());
        out << body;
    }
    void commit() { committed_ = true; }

private:
    std::vector<fs::path> written_;
    bool committed_ = false;
};

struct RunPaths {
    std::string config_file;
    std::string train, dev, test;
    std::string embeddings;
    std::string checkpoint;
    std::string out_dir = ".";
};

// Flags mirror the config fields; parsed values land here and are applied
// over the config file only when actually passed on the command line.
struct StagedFlags {
    TrainConfig cfg;
    bool no_positions = false;
};

void add_model_flags(CLI::App* cmd, StagedFlags& s) {
    cmd->add_option("--layers", s.cfg.layers, "Recurrent layer count");
    cmd->add_option("--hidden", s.cfg.hidden, "Hidden/embedding width");
    cmd->add_option("--max-neighbors", s.cfg.max_neighbors, "Neighbor budget n");
    cmd->add_option("--window", s.cfg.window, "PMI window width");
    cmd->add_option("--min-count", s.cfg.min_count, "Vocabulary frequency cutoff");
    cmd->add_option("--max-len", s.cfg.max_len, "Document truncation length");
    cmd->add_option("--max-labels", s.cfg.max_labels, "Decoder emission cap");
    cmd->add_option("--seed", s.cfg.seed, "Master RNG seed");
    cmd->add_option("--task", s.cfg.task, "single or multi")
        ->check(CLI::IsMember({"single", "multi"}));
    cmd->add_option("--epochs", s.cfg.epochs, "Training epochs");
    cmd->add_option("--lr", s.cfg.lr0, "Initial learning rate");
    cmd->add_option("--batch-size", s.cfg.batch_size, "Documents per optimizer step");
    cmd->add_option("--grad-clip", s.cfg.grad_clip, "Global-norm clip (0 = off)");
    cmd->add_option("--workers", s.cfg.workers, "Gradient worker threads");
    cmd->add_flag("--no-lstm", s.cfg.no_lstm, "Replace gated updates with tanh");
    cmd->add_flag("--no-attention", s.cfg.no_attention, "Unweighted neighbor mean");
    cmd->add_flag("--no-global", s.cfg.no_global, "Drop the graph-level node");
    cmd->add_flag("--no-positions", s.no_positions, "Drop position embeddings");
    cmd->add_flag("--symmetrize", s.cfg.symmetrize, "Add reverse edges");
    cmd->add_flag("--freeze-embeddings", s.cfg.freeze_embeddings, "Do not update E_word");
    cmd->add_flag("--per-layer-params", s.cfg.per_layer_params, "Untie layer weights");
}

void add_path_flags(CLI::App* cmd, RunPaths& p) {
    cmd->add_option("--config", p.config_file, "Flat JSON config file");
    cmd->add_option("--train", p.train, "Training corpus (label<TAB>text)");
    cmd->add_option("--dev", p.dev, "Dev corpus");
    cmd->add_option("--test", p.test, "Test corpus");
    cmd->add_option("--embeddings", p.embeddings, "Pre-trained word vectors");
    cmd->add_option("--out-dir", p.out_dir, "Artifact directory");
}

// Precedence: CLI flag > config file > default. REGNN_OUT_DIR overrides the
// artifact directory from either source.
TrainConfig merge_config(const CLI::App* cmd, const StagedFlags& s, RunPaths& paths) {
    TrainConfig cfg;
    if (!paths.config_file.empty()) {
        std::ifstream in(paths.config_file);
        if (!in) throw IoError("cannot read config " + paths.config_file);
        json j = json::parse(in);
        j.get_to(cfg);
        if (paths.train.empty()) paths.train = j.value("train", "");
        if (paths.dev.empty()) paths.dev = j.value("dev", "");
        if (paths.test.empty()) paths.test = j.value("test", "");
        if (paths.embeddings.empty()) paths.embeddings = j.value("embeddings", "");
        if (!cmd->count("--out-dir")) paths.out_dir = j.value("out_dir", paths.out_dir);
    }
    auto passed = [&](const char* name) { return cmd->count(name) > 0; };
    if (passed("--layers")) cfg.layers = s.cfg.layers;
    if (passed("--hidden")) cfg.hidden = s.cfg.hidden;
    if (passed("--max-neighbors")) cfg.max_neighbors = s.cfg.max_neighbors;
    if (passed("--window")) cfg.window = s.cfg.window;
    if (passed("--min-count")) cfg.min_count = s.cfg.min_count;
    if (passed("--max-len")) cfg.max_len = s.cfg.max_len;
    if (passed("--max-labels")) cfg.max_labels = s.cfg.max_labels;
    if (passed("--seed")) cfg.seed = s.cfg.seed;
    if (passed("--task")) cfg.task = s.cfg.task;
    if (passed("--epochs")) cfg.epochs = s.cfg.epochs;
    if (passed("--lr")) cfg.lr0 = s.cfg.lr0;
    if (passed("--batch-size")) cfg.batch_size = s.cfg.batch_size;
    if (passed("--grad-clip")) cfg.grad_clip = s.cfg.grad_clip;
    if (passed("--workers")) cfg.workers = s.cfg.workers;
    if (passed("--no-lstm")) cfg.no_lstm = true;
    if (passed("--no-attention")) cfg.no_attention = true;
    if (passed("--no-global")) cfg.no_global = true;
    if (passed("--no-positions")) cfg.use_positions = false;
    if (passed("--symmetrize")) cfg.symmetrize = true;
    if (passed("--freeze-embeddings")) cfg.freeze_embeddings = true;
    if (passed("--per-layer-params")) cfg.per_layer_params = true;
    if (const char* env = std::getenv("REGNN_OUT_DIR")) paths.out_dir = env;
    return cfg;
}

void require_file(const std::string& path, const char* what) {
    if (path.empty()) throw ConfigError(std::string(what) + " path is required");
    if (!fs::exists(path)) throw IoError(std::string(what) + " file not found: " + path);
}

fs::path prepare_out_dir(const RunPaths& paths) {
    fs::path dir(paths.out_dir);
    fs::create_directories(dir);
    return dir;
}

// Every subcommand drops the merged config next to its artifacts.
void echo_config(OutputGuard& guard, const fs::path& dir, const TrainConfig& cfg,
                 const RunPaths& paths) {
    json j = cfg;
    if (!paths.train.empty()) j["train"] = paths.train;
    if (!paths.dev.empty()) j["dev"] = paths.dev;
    if (!paths.test.empty()) j["test"] = paths.test;
    if (!paths.embeddings.empty()) j["embeddings"] = paths.embeddings;
    j["out_dir"] = paths.out_dir;
    guard.write_text(dir / "run_config.json", j.dump(2) + "\n");
}

std::string csv_number(double x) {
    std::ostringstream s;
    s << std::setprecision(17) << x;
    return s.str();
}

std::vector<RawDocument> read_optional(const std::string& path) {
    if (path.empty()) return {};
    return read_corpus_file(path);
}

int cmd_build_graph(const CLI::App* cmd, StagedFlags& staged, RunPaths& paths) {
    TrainConfig cfg = merge_config(cmd, staged, paths);
    require_file(paths.train, "corpus (--train)");
    auto raw = read_corpus_file(paths.train);
    if (raw.empty()) throw IngestError("empty corpus: " + paths.train);

    TokenizerOptions topt{cfg.window, cfg.max_len};
    std::vector<Tokenized> toks(raw.size());
    std::vector<std::vector<std::string>> token_lists;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        toks[i] = tokenize(raw[i].text, topt);
        token_lists.push_back(toks[i].tokens);
    }
    Vocab vocab = Vocab::build(token_lists, cfg.min_count);
    PmiTable pmi = count_pmi(cfg, {&raw}, vocab);

    fs::path dir = prepare_out_dir(paths);
    OutputGuard guard;
    echo_config(guard, dir, cfg, paths);

    std::ostringstream vocab_body;
    for (const auto& t : vocab.tokens()) vocab_body << t << '\n';
    guard.write_text(dir / "vocab.txt", vocab_body.str());

    double total_len = 0.0;
    std::ostringstream graphs;
    for (std::size_t i = 0; i < raw.size(); ++i) {
        std::vector<int> ids;
        for (const auto& t : toks[i].tokens) ids.push_back(vocab.id(t));
        total_len += static_cast<double>(ids.size());
        json line;
        line["nodes"] = json::array();
        json edges = json::array();
        if (!ids.empty()) {
            TextGraph g = build_graph(ids, pmi, cfg.max_neighbors, cfg.symmetrize);
            for (int id : g.tokens) line["nodes"].push_back(vocab.token(id));
            for (std::size_t u = 0; u < g.neighbors.size(); ++u)
                for (int v : g.neighbors[u]) edges.push_back({static_cast<int>(u), v});
        }
        line["edges"] = edges;
        graphs << line.dump() << '\n';
    }
    guard.write_text(dir / "graphs.jsonl", graphs.str());

    // Highest-PMI positive pairs, for eyeballing what the graphs connect.
    std::vector<std::tuple<double, int, int>> pairs;
    for (int a = 4; a < vocab.size(); ++a)
        for (int b = a + 1; b < vocab.size(); ++b) {
            double p = pmi.pmi(a, b);
            if (p > 0.0) pairs.emplace_back(p, a, b);
        }
    std::sort(pairs.begin(), pairs.end(), [](const auto& x, const auto& y) {
        if (std::get<0>(x) != std::get<0>(y)) return std::get<0>(x) > std::get<0>(y);
        return std::tie(std::get<1>(x), std::get<2>(x)) <
               std::tie(std::get<1>(y), std::get<2>(y));
    });
    json summary;
    summary["documents"] = raw.size();
    summary["vocab_size"] = vocab.size();
    summary["average_length"] = raw.empty() ? 0.0 : total_len / raw.size();
    summary["spans"] = pmi.total_spans();
    summary["pair_count"] = pmi.pair_entries();
    summary["positive_pmi_pairs"] = pmi.positive_pairs();
    json top = json::array();
    for (std::size_t i = 0; i < pairs.size() && i < 50; ++i)
        top.push_back({{"a", vocab.token(std::get<1>(pairs[i]))},
                       {"b", vocab.token(std::get<2>(pairs[i]))},
                       {"pmi", std::get<0>(pairs[i])}});
    summary["top_pairs"] = top;
    guard.write_text(dir / "pmi_summary.json", summary.dump(2) + "\n");

    std::cout << "documents: " << raw.size() << "\nvocab size: " << vocab.size()
              << "\naverage length: " << summary["average_length"].get<double>()
              << "\npositive-PMI pairs: " << pmi.positive_pairs() << "\n";
    guard.commit();
    return 0;
}

int cmd_train(const CLI::App* cmd, StagedFlags& staged, RunPaths& paths) {
    TrainConfig cfg = merge_config(cmd, staged, paths);
    require_file(paths.train, "training corpus (--train)");
    if (!paths.dev.empty()) require_file(paths.dev, "dev corpus (--dev)");
    if (!paths.test.empty()) require_file(paths.test, "test corpus (--test)");
    if (!paths.embeddings.empty()) require_file(paths.embeddings, "embeddings (--embeddings)");

    Dataset data = prepare_dataset(cfg, read_corpus_file(paths.train),
                                   read_optional(paths.dev), read_optional(paths.test));

    TrainResult res;
    if (!paths.embeddings.empty()) {
        Rng rng(cfg.seed);
        ParamSet<float> init = init_params(cfg, data.vocab.size(),
                                           static_cast<int>(data.label_names.size()), rng);
        double cov = load_embeddings(paths.embeddings, data.vocab, init);
        std::cout << "embedding coverage: " << cov << "\n";
        res = train_model(cfg, data, &init);
    } else {
        res = train_model(cfg, data);
    }

    fs::path dir = prepare_out_dir(paths);
    OutputGuard guard;
    echo_config(guard, dir, cfg, paths);

    std::ostringstream log;
    log << "epoch,lr,train_loss,dev_metric\n";
    for (const auto& e : res.log)
        log << e.epoch << ',' << csv_number(e.lr) << ',' << csv_number(e.train_loss) << ','
            << csv_number(e.dev_metric) << '\n';
    guard.write_text(dir / "train_log.csv", log.str());

    fs::path ckpt = dir / "checkpoint.bin";
    guard.track(ckpt);
    save_checkpoint(ckpt.string(), res.best);

    json metrics;
    metrics["best_epoch"] = res.best_epoch;
    metrics["best_dev_metric"] = res.best_dev_metric;
    if (!data.test.empty()) {
        if (cfg.task == "multi") {
            auto m = evaluate_multi(cfg, res.best.params, data.test,
                                    static_cast<int>(data.label_names.size()));
            metrics["test"] = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
        } else {
            metrics["test"] = {{"accuracy",
                                evaluate_accuracy(cfg, res.best.params, data.test)}};
        }
    }
    guard.write_text(dir / "metrics.json", metrics.dump(2) + "\n");

    std::cout << "best epoch: " << res.best_epoch
              << "\nbest dev metric: " << res.best_dev_metric << "\n";
    guard.commit();
    return 0;
}

int cmd_eval(const CLI::App* cmd, StagedFlags& staged, RunPaths& paths, int seeds,
             const std::string& predictions_path) {
    TrainConfig cli_cfg = merge_config(cmd, staged, paths);
    require_file(paths.test, "test corpus (--test)");
    auto test_raw = read_corpus_file(paths.test);
    auto train_raw = read_optional(paths.train);
    auto dev_raw = read_optional(paths.dev);

    fs::path dir = prepare_out_dir(paths);
    OutputGuard guard;

    if (seeds > 1) {
        // Retrains from scratch per seed; needs the training corpus.
        require_file(paths.train, "training corpus (--train)");
        auto runs = multi_seed_metrics(cli_cfg, train_raw, dev_raw, test_raw, seeds);
        MeanStd ms = mean_std(runs);
        echo_config(guard, dir, cli_cfg, paths);
        json out{{"runs", runs}, {"mean", ms.mean}, {"std", ms.stddev}};
        guard.write_text(dir / "metrics.json", out.dump(2) + "\n");
        std::cout << "metric: " << ms.mean << " +/- " << ms.stddev << " over " << seeds
                  << " seeds\n";
        guard.commit();
        return 0;
    }

    require_file(paths.checkpoint, "checkpoint (--checkpoint)");
    Checkpoint ckpt = load_checkpoint(paths.checkpoint);
    TrainConfig cfg = config_from_header(ckpt.header);
    Vocab vocab = vocab_from_header(ckpt.header);
    auto labels = labels_from_header(ckpt.header);

    // Graphs depend on corpus-wide PMI; recount over the same files the
    // checkpoint was trained with to reproduce them exactly.
    std::vector<const std::vector<RawDocument>*> sets{&test_raw};
    if (!train_raw.empty()) sets.insert(sets.begin(), &train_raw);
    if (!dev_raw.empty()) sets.insert(sets.end() - 1, &dev_raw);
    PmiTable pmi = count_pmi(cfg, sets, vocab);
    auto docs = prepare_docs(cfg, test_raw, vocab, labels, pmi);
    if (docs.empty()) throw ContractError("no evaluable documents in " + paths.test);

    echo_config(guard, dir, cfg, paths);
    json metrics;
    std::vector<std::vector<int>> preds;
    if (cfg.task == "multi") {
        auto m = evaluate_multi(cfg, ckpt.params, docs, static_cast<int>(labels.size()),
                                &preds);
        metrics = {{"precision", m.precision}, {"recall", m.recall}, {"f1", m.f1}};
    } else {
        long long hits = 0;
        for (const auto& doc : docs) {
            Tape<float> tape;
            auto bound = bind_params(tape, ckpt.params, false);
            ModelGraph<float> mg(tape, doc.graph, bound, cfg);
            auto states = mg.run(cfg.layers);
            int pick = classify_single(tape, mg.readout(states), bound);
            preds.push_back({pick});
            if (pick == doc.labels[0]) ++hits;
        }
        metrics = {{"accuracy", static_cast<double>(hits) / docs.size()}};
    }
    guard.write_text(dir / "metrics.json", metrics.dump(2) + "\n");

    if (!predictions_path.empty()) {
        std::ostringstream body;
        for (std::size_t i = 0; i < docs.size(); ++i) {
            json names_pred = json::array(), names_gold = json::array();
            for (int k : preds[i]) names_pred.push_back(labels[k]);
            for (int k : docs[i].labels) names_gold.push_back(labels[k]);
            body << json{{"id", i}, {"pred", names_pred}, {"gold", names_gold}}.dump()
                 << '\n';
        }
        guard.write_text(dir / predictions_path, body.str());
    }

    std::cout << metrics.dump() << "\n";
    guard.commit();
    return 0;
}

int cmd_diagnose(const CLI::App* cmd, StagedFlags& staged, RunPaths& paths,
                 const std::string& which, int doc_index, int step,
                 std::vector<int> budgets) {
    TrainConfig cli_cfg = merge_config(cmd, staged, paths);
    fs::path dir = prepare_out_dir(paths);
    OutputGuard guard;

    if (which == "sweep") {
        require_file(paths.train, "training corpus (--train)");
        if (budgets.empty()) budgets = {2, 3, 5, 7, 9};
        auto points = neighbor_sweep(cli_cfg, read_corpus_file(paths.train),
                                     read_optional(paths.dev), read_optional(paths.test),
                                     budgets);
        echo_config(guard, dir, cli_cfg, paths);
        guard.write_text(dir / "sweep.csv", sweep_csv(points));
        std::cout << sweep_csv(points);
        guard.commit();
        return 0;
    }

    require_file(paths.checkpoint, "checkpoint (--checkpoint)");
    require_file(paths.test, "corpus (--test)");
    Checkpoint ckpt = load_checkpoint(paths.checkpoint);
    TrainConfig cfg = config_from_header(ckpt.header);
    if (cmd->count("--layers")) cfg.layers = staged.cfg.layers;  // depth is a probe knob
    Vocab vocab = vocab_from_header(ckpt.header);
    auto labels = labels_from_header(ckpt.header);
    auto raw = read_corpus_file(paths.test);
    auto train_raw = read_optional(paths.train);
    std::vector<const std::vector<RawDocument>*> sets{&raw};
    if (!train_raw.empty()) sets.insert(sets.begin(), &train_raw);
    PmiTable pmi = count_pmi(cfg, sets, vocab);
    auto docs = prepare_docs(cfg, raw, vocab, labels, pmi);
    if (docs.empty()) throw ContractError("no evaluable documents in " + paths.test);
    echo_config(guard, dir, cfg, paths);

    if (which == "smoothing") {
        auto profile = smoothing_profile(cfg, ckpt.params, docs, cfg.layers);
        std::string variant = cfg.no_lstm ? "no_lstm" : "full";
        guard.write_text(dir / "smoothing.csv", smoothing_csv(profile, variant));
        std::cout << smoothing_csv(profile, variant);
    } else if (which == "heatmap") {
        if (doc_index < 0 || doc_index >= static_cast<int>(docs.size()))
            throw ContractError("document index out of range: " + std::to_string(doc_index));
        const auto& doc = docs[doc_index];
        Tape<float> tape;
        auto bound = bind_params(tape, ckpt.params, false);
        ModelGraph<float> mg(tape, doc.graph, bound, cfg);
        auto states = mg.run(cfg.layers);
        auto decoded = decode_greedy(tape, mg.readout(states), states.back().h, bound,
                                     static_cast<int>(labels.size()), cfg.max_labels);
        std::vector<std::string> tokens;
        for (int id : doc.graph.tokens) tokens.push_back(vocab.token(id));
        auto heat = attention_heatmap(decoded, tokens, static_cast<std::size_t>(step));
        guard.write_text(dir / "heatmap.json", heatmap_json(heat) + "\n");
        std::cout << heatmap_json(heat) << "\n";
    } else {
        throw ConfigError("unknown diagnostic: " + which);
    }
    guard.commit();
    return 0;
}

// Normalizes foreign corpus layouts to the canonical label<TAB>text format.
//   plain: first whitespace-separated field is the label, the rest is text.
//   jsonl: one JSON object per line with "text" and "label" or "labels".
int cmd_import(const std::string& input, const std::string& format,
               const std::string& output) {
    require_file(input, "input (--input)");
    std::ifstream in(input);
    if (!in) throw IoError("cannot read " + input);
    std::ostringstream body;
    std::string line;
    std::size_t count = 0;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        std::string label, text;
        if (format == "plain") {
            auto sp = line.find_first_of(" \t");
            if (sp == std::string::npos)
                throw IngestError("line " + std::to_string(count + 1) + ": no text field");
            label = line.substr(0, sp);
            text = line.substr(sp + 1);
        } else if (format == "jsonl") {
            json j = json::parse(line);
            text = j.at("text").get<std::string>();
            if (j.contains("labels")) {
                std::string joined;
                for (const auto& l : j.at("labels")) {
                    if (!joined.empty()) joined += '|';
                    joined += l.get<std::string>();
                }
                label = joined;
            } else {
                label = j.at("label").get<std::string>();
            }
        } else {
            throw ConfigError("unknown format: " + format);
        }
        if (label.empty()) throw IngestError("line " + std::to_string(count + 1) +
                                             ": empty label");
        body << label << '\t' << text << '\n';
        ++count;
    }
    if (count == 0) throw IngestError("empty corpus: " + input);
    OutputGuard guard;
    guard.write_text(output, body.str());
    std::cout << "wrote " << count << " documents to " << output << "\n";
    guard.commit();
    return 0;
}

}  // namespace

int main(int argc, char** argv) {
    CLI::App app{"Text-graph recurrent network: graph building, training, "
                 "evaluation, diagnostics"};
    app.require_subcommand(1);

    StagedFlags staged_bg, staged_tr, staged_ev, staged_dg;
    RunPaths paths_bg, paths_tr, paths_ev, paths_dg;

    CLI::App* build = app.add_subcommand("build-graph", "Dump per-document text graphs");
    add_path_flags(build, paths_bg);
    add_model_flags(build, staged_bg);

    CLI::App* train = app.add_subcommand("train", "Train and write the best checkpoint");
    add_path_flags(train, paths_tr);
    add_model_flags(train, staged_tr);

    int seeds = 1;
    std::string predictions_path;
    CLI::App* eval = app.add_subcommand("eval", "Evaluate a checkpoint");
    add_path_flags(eval, paths_ev);
    add_model_flags(eval, staged_ev);
    eval->add_option("--checkpoint", paths_ev.checkpoint, "Trained checkpoint");
    eval->add_option("--seeds", seeds, "Retrain over k seeds, report mean +/- std");
    eval->add_option("--predictions", predictions_path, "Per-document prediction dump");

    std::string which = "smoothing";
    int doc_index = 0, step = 0;
    std::vector<int> budgets;
    CLI::App* diag = app.add_subcommand("diagnose", "Smoothing, heatmap, or neighbor sweep");
    add_path_flags(diag, paths_dg);
    add_model_flags(diag, staged_dg);
    diag->add_option("--checkpoint", paths_dg.checkpoint, "Trained checkpoint");
    diag->add_option("--which", which, "smoothing, heatmap, or sweep")
        ->check(CLI::IsMember({"smoothing", "heatmap", "sweep"}));
    diag->add_option("--doc", doc_index, "Document index for heatmap");
    diag->add_option("--step", step, "Decode step for heatmap");
    diag->add_option("--sweep-n", budgets, "Neighbor budgets for sweep");

    std::string import_in, import_format = "plain", import_out = "corpus.tsv";
    CLI::App* import_cmd = app.add_subcommand("import", "Convert a corpus to label<TAB>text");
    import_cmd->add_option("--input", import_in, "Source file")->required();
    import_cmd->add_option("--format", import_format, "plain or jsonl");
    import_cmd->add_option("--output", import_out, "Destination file");

    CLI11_PARSE(app, argc, argv);

    try {
        if (build->parsed()) return cmd_build_graph(build, staged_bg, paths_bg);
        if (train->parsed()) return cmd_train(train, staged_tr, paths_tr);
        if (eval->parsed())
            return cmd_eval(eval, staged_ev, paths_ev, seeds, predictions_path);
        if (diag->parsed())
            return cmd_diagnose(diag, staged_dg, paths_dg, which, doc_index, step, budgets);
        if (import_cmd->parsed()) return cmd_import(import_in, import_format, import_out);
    } catch (const std::exception& e) {
        std::cerr << "error: " << e.what() << "\n";
        return 1;
    }
    return 0;
}

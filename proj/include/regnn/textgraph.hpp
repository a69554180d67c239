#pragma once

#include <cstdint>
#include <limits>
#include <string>
#include <unordered_map>
#include <vector>

#include "regnn/tensor.hpp"

namespace regnn {

struct IngestError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct ConfigError : std::runtime_error {
    using std::runtime_error::runtime_error;
};
struct IoError : std::runtime_error {
    using std::runtime_error::runtime_error;
};

struct TokenizerOptions {
    int window = 10;    // sliding-window width when no sentence boundaries exist
    int max_len = 200;  // document truncation length in tokens
};

struct Tokenized {
    std::vector<std::string> tokens;              // node sequence, truncated
    std::vector<std::vector<std::string>> spans;  // sentences, else stride-1 windows
};

// Lowercases, detaches punctuation, splits on whitespace. Terminal marks
// (. ! ?) delimit sentences and are dropped from the token sequence.
Tokenized tokenize(const std::string& text, const TokenizerOptions& opt = {});

class Vocab {
public:
    static constexpr int kUnk = 0;
    static constexpr int kPad = 1;
    static constexpr int kStart = 2;
    static constexpr int kEnd = 3;

    // Tallies frequencies over the whole corpus; tokens under min_count
    // collapse to UNK. Ids are dense and assigned in first-appearance order
    // after the four specials.
    static Vocab build(const std::vector<std::vector<std::string>>& corpus_tokens,
                       int min_count = 5);

    // Rebuild from a saved id->token list (checkpoint load).
    static Vocab from_tokens(std::vector<std::string> id_to_token);

    int id(const std::string& token) const;  // kUnk for unknown tokens
    const std::string& token(int id) const { return id_to_token_.at(id); }
    int size() const { return static_cast<int>(id_to_token_.size()); }
    long long frequency(const std::string& token) const;
    const std::vector<std::string>& tokens() const { return id_to_token_; }

private:
    std::unordered_map<std::string, int> token_to_id_;
    std::vector<std::string> id_to_token_;
    std::unordered_map<std::string, long long> freq_;
};

// Corpus-wide span statistics. Each distinct token (and unordered distinct
// token pair) counts once per span; probabilities are span-relative.
class PmiTable {
public:
    void add_span(const std::vector<int>& token_ids);

    long long total_spans() const { return total_; }
    long long span_count(int token) const;
    long long pair_count(int a, int b) const;

    // log(p(i,j) / (p(i) p(j))), natural log; -inf when the pair never
    // co-occurs (so it can never be a positive candidate).
    double pmi(int a, int b) const;

    std::size_t positive_pairs() const;
    std::size_t pair_entries() const { return pair_.size(); }

private:
    static std::uint64_t key(int a, int b);
    std::unordered_map<int, long long> uni_;
    std::unordered_map<std::uint64_t, long long> pair_;
    long long total_ = 0;
};

PmiTable compute_pmi(const std::vector<std::vector<std::vector<int>>>& corpus_spans);

struct TextGraph {
    std::vector<int> tokens;                  // token ids in document order
    std::vector<int> positions;               // 0-based sequence position per node
    std::vector<std::vector<int>> neighbors;  // node indices, at most n per node

    int size() const { return static_cast<int>(tokens.size()); }
};

// Per node: the direct sequence neighbors, then up to n - |direct| candidates
// by descending positive PMI (ties broken by smaller node index). With
// symmetrize, reverse edges are added after selection.
TextGraph build_graph(const std::vector<int>& tokens, const PmiTable& pmi, int n,
                      bool symmetrize = false);

struct RawDocument {
    std::vector<std::string> labels;
    std::string text;
};

// One document per line: label<TAB>text, labels separated by '|'.
std::vector<RawDocument> read_corpus_file(const std::string& path);

}  // namespace regnn

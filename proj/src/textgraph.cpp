#include "regnn/textgraph.hpp"

#include <algorithm>
#include <cctype>
#include <cmath>
#include <fstream>
#include <set>
#include <sstream>

namespace regnn {

namespace {

bool is_word_char(unsigned char c) { return std::isalnum(c) || c >= 0x80; }
bool is_terminal(const std::string& t) { return t == "." || t == "!" || t == "?"; }

}  // namespace

Tokenized tokenize(const std::string& text, const TokenizerOptions& opt) {
    // Raw pass: lowercase, punctuation detached into single-char tokens.
    std::vector<std::string> raw;
    std::string cur;
    for (unsigned char c : text) {
        if (std::isspace(c)) {
            if (!cur.empty()) raw.push_back(std::move(cur)), cur.clear();
        } else if (is_word_char(c)) {
            cur.push_back(static_cast<char>(std::tolower(c)));
        } else {
            if (!cur.empty()) raw.push_back(std::move(cur)), cur.clear();
            raw.push_back(std::string(1, static_cast<char>(c)));
        }
    }
    if (!cur.empty()) raw.push_back(std::move(cur));

    Tokenized out;
    bool has_sentences = false;
    std::vector<std::size_t> breaks;  // sentence-end offsets into out.tokens
    for (const auto& t : raw) {
        if (is_terminal(t)) {
            has_sentences = true;
            if (breaks.empty() || breaks.back() != out.tokens.size())
                breaks.push_back(out.tokens.size());
        } else if (static_cast<int>(out.tokens.size()) < opt.max_len) {
            out.tokens.push_back(t);
        }
    }
    if (out.tokens.empty()) return out;

    if (has_sentences) {
        if (breaks.empty() || breaks.back() != out.tokens.size())
            breaks.push_back(out.tokens.size());
        std::size_t start = 0;
        for (std::size_t end : breaks) {
            if (end > start)
                out.spans.emplace_back(out.tokens.begin() + start, out.tokens.begin() + end);
            start = end;
        }
    } else {
        int m = static_cast<int>(out.tokens.size());
        int w = std::max(1, opt.window);
        if (m <= w) {
            out.spans.push_back(out.tokens);
        } else {
            for (int i = 0; i + w <= m; ++i)
                out.spans.emplace_back(out.tokens.begin() + i, out.tokens.begin() + i + w);
        }
    }
    return out;
}

Vocab Vocab::build(const std::vector<std::vector<std::string>>& corpus_tokens, int min_count) {
    if (corpus_tokens.empty()) throw IngestError("cannot build vocabulary from an empty corpus");
    Vocab v;
    v.id_to_token_ = {"<unk>", "<pad>", "<start>", "<end>"};
    for (int i = 0; i < 4; ++i) v.token_to_id_[v.id_to_token_[i]] = i;
    std::vector<std::string> order;
    for (const auto& doc : corpus_tokens)
        for (const auto& t : doc) {
            auto it = v.freq_.find(t);
            if (it == v.freq_.end()) {
                v.freq_[t] = 1;
                order.push_back(t);
            } else {
                ++it->second;
            }
        }
    for (const auto& t : order)
        if (v.freq_[t] >= min_count && !v.token_to_id_.count(t)) {
            v.token_to_id_[t] = static_cast<int>(v.id_to_token_.size());
            v.id_to_token_.push_back(t);
        }
    return v;
}

Vocab Vocab::from_tokens(std::vector<std::string> id_to_token) {
    Vocab v;
    v.id_to_token_ = std::move(id_to_token);
    for (int i = 0; i < static_cast<int>(v.id_to_token_.size()); ++i)
        v.token_to_id_[v.id_to_token_[i]] = i;
    return v;
}

int Vocab::id(const std::string& token) const {
    auto it = token_to_id_.find(token);
    return it == token_to_id_.end() ? kUnk : it->second;
}

long long Vocab::frequency(const std::string& token) const {
    auto it = freq_.find(token);
    return it == freq_.end() ? 0 : it->second;
}

std::uint64_t PmiTable::key(int a, int b) {
    if (a > b) std::swap(a, b);
    return (static_cast<std::uint64_t>(a) << 32) | static_cast<std::uint32_t>(b);
}

void PmiTable::add_span(const std::vector<int>& token_ids) {
    ++total_;
    std::set<int> uniq(token_ids.begin(), token_ids.end());
    for (int t : uniq) ++uni_[t];
    for (auto it = uniq.begin(); it != uniq.end(); ++it)
        for (auto jt = std::next(it); jt != uniq.end(); ++jt) ++pair_[key(*it, *jt)];
}

long long PmiTable::span_count(int token) const {
    auto it = uni_.find(token);
    return it == uni_.end() ? 0 : it->second;
}

long long PmiTable::pair_count(int a, int b) const {
    auto it = pair_.find(key(a, b));
    return it == pair_.end() ? 0 : it->second;
}

double PmiTable::pmi(int a, int b) const {
    long long pc = pair_count(a, b);
    if (pc == 0 || total_ == 0) return -std::numeric_limits<double>::infinity();
    // log((pc/N) / ((ca/N)(cb/N))) = log(pc * N / (ca * cb))
    double ca = static_cast<double>(span_count(a));
    double cb = static_cast<double>(span_count(b));
    return std::log(static_cast<double>(pc) * static_cast<double>(total_) / (ca * cb));
}

std::size_t PmiTable::positive_pairs() const {
    std::size_t n = 0;
    for (const auto& [k, pc] : pair_) {
        int a = static_cast<int>(k >> 32), b = static_cast<int>(k & 0xffffffffu);
        if (pmi(a, b) > 0.0) ++n;
    }
    return n;
}

PmiTable compute_pmi(const std::vector<std::vector<std::vector<int>>>& corpus_spans) {
    PmiTable table;
    for (const auto& doc : corpus_spans)
        for (const auto& span : doc) table.add_span(span);
    return table;
}

TextGraph build_graph(const std::vector<int>& tokens, const PmiTable& pmi, int n,
                      bool symmetrize) {
    if (n < 2) throw ConfigError("max_neighbors must be >= 2, got " + std::to_string(n));
    if (tokens.empty()) throw ContractError("build_graph on an empty token sequence");
    int m = static_cast<int>(tokens.size());
    TextGraph g;
    g.tokens = tokens;
    g.positions.resize(m);
    for (int i = 0; i < m; ++i) g.positions[i] = i;
    g.neighbors.resize(m);

    for (int i = 0; i < m; ++i) {
        auto& nb = g.neighbors[i];
        if (i > 0) nb.push_back(i - 1);
        if (i + 1 < m) nb.push_back(i + 1);
        int budget = n - static_cast<int>(nb.size());
        if (budget <= 0) continue;
        // Candidates: same-document nodes with strictly positive PMI to token i.
        std::vector<std::pair<double, int>> cand;
        for (int j = 0; j < m; ++j) {
            if (j == i || j == i - 1 || j == i + 1) continue;
            if (tokens[j] == tokens[i]) continue;
            double score = pmi.pmi(tokens[i], tokens[j]);
            if (score > 0.0) cand.emplace_back(score, j);
        }
        std::sort(cand.begin(), cand.end(), [](const auto& a, const auto& b) {
            if (a.first != b.first) return a.first > b.first;
            return a.second < b.second;
        });
        for (int k = 0; k < budget && k < static_cast<int>(cand.size()); ++k)
            nb.push_back(cand[k].second);
    }

    if (symmetrize) {
        auto lists = g.neighbors;
        for (int i = 0; i < m; ++i)
            for (int j : lists[i]) {
                auto& back = g.neighbors[j];
                if (std::find(back.begin(), back.end(), i) == back.end()) back.push_back(i);
            }
    }
    return g;
}

std::vector<RawDocument> read_corpus_file(const std::string& path) {
    std::ifstream in(path);
    if (!in) throw IoError("cannot open corpus file: " + path);
    std::vector<RawDocument> docs;
    std::string line;
    while (std::getline(in, line)) {
        if (line.empty()) continue;
        auto tab = line.find('\t');
        if (tab == std::string::npos)
            throw IngestError(path + ": line " + std::to_string(docs.size() + 1) +
                              " has no label<TAB>text separator");
        RawDocument d;
        d.text = line.substr(tab + 1);
        std::stringstream labels(line.substr(0, tab));
        std::string lab;
        while (std::getline(labels, lab, '|'))
            if (!lab.empty()) d.labels.push_back(lab);
        docs.push_back(std::move(d));
    }
    return docs;
}

}  // namespace regnn

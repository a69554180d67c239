#pragma once

#include <cstdint>
#include <string>
#include <vector>

#include "regnn/textgraph.hpp"

namespace regnn {

// Seeded keyword-family corpus: each family owns a disjoint keyword pair that
// is planted close together in the text; the document's labels are exactly
// the planted families, so they are recoverable by keyword lookup.
struct SyntheticOptions {
    int num_docs = 2000;
    int vocab_words = 200;
    int families = 4;
    int min_len = 20;
    int max_len = 40;
    bool multi_label = false;
    int max_families_per_doc = 3;
    std::uint64_t seed = 7;
};

std::vector<RawDocument> generate_synthetic(const SyntheticOptions& opt);

std::string family_label(int family);
std::pair<std::string, std::string> family_keywords(int family);

}  // namespace regnn

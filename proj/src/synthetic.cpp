#include "regnn/synthetic.hpp"

#include <algorithm>

#include "regnn/rng.hpp"

namespace regnn {

namespace {

std::string word_name(int i) {
    std::string s = std::to_string(i);
    while (s.size() < 3) s.insert(s.begin(), '0');
    return "w" + s;
}

}  // namespace

std::string family_label(int family) { return "fam" + std::to_string(family); }

std::pair<std::string, std::string> family_keywords(int family) {
    return {word_name(2 * family), word_name(2 * family + 1)};
}

std::vector<RawDocument> generate_synthetic(const SyntheticOptions& opt) {
    Rng rng(opt.seed);
    int filler_lo = 2 * opt.families;  // keywords occupy the first 2*families words
    std::vector<RawDocument> docs;
    docs.reserve(opt.num_docs);
    for (int d = 0; d < opt.num_docs; ++d) {
        int len = opt.min_len + static_cast<int>(rng.next_below(opt.max_len - opt.min_len + 1));
        // Short documents must still fit every planted pair plus breathing
        // room, or the placement loop below could run out of free slots.
        len = std::max(len, 4 * std::min(opt.max_families_per_doc, opt.families) + 2);
        std::vector<std::string> tokens(len);
        for (auto& t : tokens)
            t = word_name(filler_lo +
                          static_cast<int>(rng.next_below(opt.vocab_words - filler_lo)));

        int nfam = 1;
        if (opt.multi_label)
            nfam = 1 + static_cast<int>(rng.next_below(
                           std::min(opt.max_families_per_doc, opt.families)));
        std::vector<int> fams;
        while (static_cast<int>(fams.size()) < nfam) {
            int f = static_cast<int>(rng.next_below(opt.families));
            if (std::find(fams.begin(), fams.end(), f) == fams.end()) fams.push_back(f);
        }
        std::sort(fams.begin(), fams.end());

        RawDocument doc;
        std::vector<bool> used(len, false);
        for (int f : fams) {
            // Plant the pair with a small gap so it lands inside one window,
            // avoiding positions already claimed by another family.
            int pos = 0, gap = 1;
            do {
                gap = 1 + static_cast<int>(rng.next_below(3));
                pos = static_cast<int>(rng.next_below(std::max(1, len - gap - 1)));
            } while (used[pos] || used[pos + gap]);
            used[pos] = used[pos + gap] = true;
            auto [a, b] = family_keywords(f);
            tokens[pos] = a;
            tokens[pos + gap] = b;
            doc.labels.push_back(family_label(f));
        }
        for (std::size_t i = 0; i < tokens.size(); ++i) {
            if (i) doc.text += ' ';
            doc.text += tokens[i];
        }
        docs.push_back(std::move(doc));
    }
    return docs;
}

}  // namespace regnn

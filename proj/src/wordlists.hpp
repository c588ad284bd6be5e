#pragma once

#include <string>
#include <vector>

#include "cartograf/corpus.hpp"
#include "cartograf/rng.hpp"

// Word inventories behind the synthetic corpus generator and the
// compiled-in feature resources. data/ ships the same content as files;
// test_features.cpp asserts the two stay in sync.
namespace cartograf::words {

struct Valenced {
    const char* token;
    double valence;
};

// Function words double as the stop list.
extern const std::vector<std::string>& function_words();
extern const std::vector<std::string>& common_words();
extern const std::vector<Valenced>& positive_words();
extern const std::vector<Valenced>& negative_words();
// Class-signal vocabularies: informal hedges vs. formal connectives.
extern const std::vector<std::string>& human_vocab();
extern const std::vector<std::string>& generated_vocab();
extern const std::vector<std::string>& pronouns();

/// Pseudo-word of 2-3 syllables from a fixed 12-syllable inventory;
/// consumes one below(2) and one below(12) per syllable from rng.
std::string pseudo_word(Rng& rng);

/// Filler vocabulary shared by every synthetic domain: 16 two-syllable
/// pseudo-words. Domains differ in how often they use each word, not in
/// which words exist, so no domain introduces unseen tokens.
const std::vector<std::string>& filler_pool();

/// Per-domain sampling weights over filler_pool(), derived from the domain
/// name; entries span roughly an 8x range.
std::vector<double> domain_weights(const std::string& domain);

/// The per-class style marker planted in synthetic train-domain anchor
/// texts (and sprinkled label-independently into test texts).
std::string style_token(corpus::Label label);

} // namespace cartograf::words

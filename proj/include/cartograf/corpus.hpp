#pragma once

#include <cstdint>
#include <map>
#include <set>
#include <string>
#include <utility>
#include <vector>

namespace cartograf::features {
struct SentimentLexicon;
}

namespace cartograf::corpus {

enum class Label { human = 0, generated = 1 };

const char* to_string(Label label);
Label label_from_string(const std::string& s); // throws DataError on unknown strings

/// One labeled text. The id is assigned once and never mutated; it is the
/// key that training dynamics are tracked under.
struct Example {
    std::string id;
    std::string text;   // UTF-8, at least one character
    Label label = Label::human;
    std::string domain; // writing-style tag, e.g. "tweets"
};

enum class SplitName { train, test };

const char* to_string(SplitName name);

/// An ordered dataset. Iteration order equals file order (or generation
/// order); nothing in the toolkit reorders it.
struct DatasetSplit {
    SplitName name = SplitName::train;
    std::vector<Example> examples;
    std::set<std::string> domains;
};

/// One histogram bucket [start, start + bin_width).
struct LengthBin {
    long start = 0;
    long long count = 0;
};

struct CorpusStats {
    std::map<Label, long long> pronoun_count;
    std::map<Label, double> mean_pos;
    std::map<Label, double> mean_neg;
    std::map<Label, std::vector<LengthBin>> length_histogram;
};

/// Parse a 4-column TSV (`id  label  domain  text`) with a header row.
/// Tabs, newlines and backslashes inside text are escaped as \t, \n, \\.
/// Throws DataError with the offending row number for: missing file,
/// wrong column count, unknown label, empty text, duplicate id, and for a
/// file that holds only the header ("empty dataset").
DatasetSplit load_dataset(const std::string& path, SplitName name);

/// Inverse of load_dataset: header plus escaped rows, LF line endings.
/// Parsing then re-serializing a dataset file reproduces it byte for byte.
std::string serialize_dataset(const DatasetSplit& split);

void save_dataset(const DatasetSplit& split, const std::string& path);

/// Assign ids "e0000000", "e0000001", ... in input order. Deterministic;
/// any pre-existing ids are overwritten.
std::vector<Example> assign_ids(std::vector<Example> examples);

struct SynthConfig {
    int n_per_class_per_domain = 1;
    std::vector<std::string> train_domains;
    std::vector<std::string> test_domains;
    double sentiment_skew = 0.3; // boosts positive-word rate of the generated class
    uint64_t seed = 0;
};

/// Deterministic synthetic corpus with out-of-distribution domain
/// structure. Same seed, same bytes. Throws DataError when the domain
/// lists overlap or n_per_class_per_domain < 1.
///
/// Texts are word mixtures drawn per class and per domain; docs/README
/// spells out the exact generation procedure so that independent
/// implementations can reproduce the corpus byte for byte.
std::pair<DatasetSplit, DatasetSplit> generate_synthetic_corpus(const SynthConfig& config);

/// Token occurrences (case-insensitive, after tokenization) that are in
/// pronoun_list, totalled per class.
std::map<Label, long long> pronoun_count(const DatasetSplit& split,
                                         const std::set<std::string>& pronoun_list);

/// Per-class histogram of text lengths in Unicode scalar values, bucketed
/// as [k*w, (k+1)*w). Bins run from 0 through the longest text; zero-count
/// bins in between are kept so plots stay contiguous.
std::map<Label, std::vector<LengthBin>> length_histogram(const DatasetSplit& split,
                                                         int bin_width_chars);

/// Arithmetic mean over each class of per-example sentiment scores
/// (features::sentiment_scores). Throws DataError on an empty split.
std::map<Label, std::pair<double, double>> class_sentiment_means(
    const DatasetSplit& split, const features::SentimentLexicon& lexicon);

/// pronoun_count + class_sentiment_means + length_histogram in one record.
CorpusStats corpus_stats(const DatasetSplit& split,
                         const std::set<std::string>& pronoun_list,
                         const features::SentimentLexicon& lexicon,
                         int bin_width_chars);

} // namespace cartograf::corpus

#pragma once

#include <map>
#include <string>
#include <vector>

#include "cartograf/model.hpp"

namespace cartograf::dynamics {

/// Raw class scores for one example at one epoch; the unit of training
/// dynamics.
struct EpochLogitRecord {
    std::string example_id;
    int epoch = 0;
    std::array<double, 2> logits{};
    int gold = 0;
};

/// Per-example coordinates on the data map.
struct DynamicsSummary {
    std::string example_id;
    double confidence = 0.0;  // mean gold-label probability across epochs
    double variability = 0.0; // population std of the same sequence
    double correctness = 0.0; // fraction of epochs predicted correctly
};

enum class Region { easy, ambiguous, hard };

const char* to_string(Region region);
Region region_from_string(const std::string& s);

struct SelectionSpec {
    Region region = Region::ambiguous;
    double fraction = 0.0; // in [0,1]
};

using RegionLabeling = std::map<std::string, Region>;

/// Append-only JSONL sink for epoch logit records. One object per line,
/// fixed key order, reals with 9 significant digits:
///   {"id":"e0000001","epoch":0,"logits":[-0.12,0.34],"gold":1}
/// Rejects duplicate (id, epoch) pairs.
class DynamicsLog {
public:
    void append(const EpochLogitRecord& record); // throws DataError on duplicates
    const std::vector<EpochLogitRecord>& records() const { return records_; }
    std::string to_jsonl() const;
    void write_jsonl(const std::string& path) const;

    static DynamicsLog from_jsonl(const std::string& text);
    static DynamicsLog load_jsonl(const std::string& path);

private:
    std::vector<EpochLogitRecord> records_;
    std::map<std::pair<std::string, int>, bool> seen_;
};

std::string to_jsonl_line(const EpochLogitRecord& record);

/// Eval-mode pass over the train set at the end of an epoch; appends one
/// record per example in ascending id order.
void record_epoch(const model::ParameterSet& params,
                  const std::vector<features::FeaturizedExample>& trainset, int epoch,
                  DynamicsLog& sink);

/// Arithmetic mean. Throws DataError on an empty sequence.
double confidence(const std::vector<double>& gold_probs);

/// Population standard deviation: sqrt(sum (p - mean)^2 / E).
double variability(const std::vector<double>& gold_probs);

/// Fraction of epochs whose argmax matches gold; logit ties go to class 0.
double correctness(const std::vector<EpochLogitRecord>& records);

/// One summary per example from a complete N x E log; gold probabilities
/// come from softmax over the stored logits. Throws DataError naming every
/// missing (id, epoch) pair when the log is incomplete. Output is sorted
/// by example id.
std::vector<DynamicsSummary> summarize(const DynamicsLog& log);

/// Rank-and-take selection. Sort key: ambiguous = variability descending,
/// easy = confidence descending, hard = confidence ascending; ties broken
/// by id ascending. Returns ceil(fraction * N) ids in sorted-key order.
std::vector<std::string> select_subset(const std::vector<DynamicsSummary>& summaries,
                                       const SelectionSpec& spec);

/// Set union, deduplicated, ascending id order.
std::vector<std::string> mix_subsets(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b);

/// Rank-based total partition for reporting: ambiguous = top third by
/// variability; of the remainder, easy = upper half by confidence and hard
/// = lower half. Ties break by id. Requires at least 3 summaries.
RegionLabeling label_regions(const std::vector<DynamicsSummary>& summaries);

enum class Dimension { confidence, variability, correctness };

const char* to_string(Dimension d);
Dimension dimension_from_string(const std::string& s);

struct DensityBin {
    double bin_start = 0.0;
    long long count = 0;
};

/// Equal-width bins over [0,1], half-open with the last bin closed.
std::vector<DensityBin> density_histogram(const std::vector<DynamicsSummary>& summaries,
                                          Dimension dimension, int bins);

// --- summaries.csv -------------------------------------------------------

/// Header `id,confidence,variability,correctness`, 6-decimal fixed point.
std::string summaries_to_csv(const std::vector<DynamicsSummary>& summaries);
std::vector<DynamicsSummary> summaries_from_csv(const std::string& text);
void write_summaries_csv(const std::string& path, const std::vector<DynamicsSummary>& summaries);
std::vector<DynamicsSummary> load_summaries_csv(const std::string& path);

} // namespace cartograf::dynamics

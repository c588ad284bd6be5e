#include "cartograf/dynamics.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>
#include <set>
#include <sstream>

#include <json.hpp>

#include "cartograf/errors.hpp"

namespace cartograf::dynamics {

const char* to_string(Region region) {
    switch (region) {
    case Region::easy: return "easy";
    case Region::ambiguous: return "ambiguous";
    default: return "hard";
    }
}

Region region_from_string(const std::string& s) {
    if (s == "easy") return Region::easy;
    if (s == "ambiguous") return Region::ambiguous;
    if (s == "hard") return Region::hard;
    throw DataError("unknown region \"" + s + "\" (expected easy|ambiguous|hard)");
}

const char* to_string(Dimension d) {
    switch (d) {
    case Dimension::confidence: return "confidence";
    case Dimension::variability: return "variability";
    default: return "correctness";
    }
}

Dimension dimension_from_string(const std::string& s) {
    if (s == "confidence") return Dimension::confidence;
    if (s == "variability") return Dimension::variability;
    if (s == "correctness") return Dimension::correctness;
    throw DataError("unknown dimension \"" + s + "\"");
}

namespace {
std::string fmt_real(double v) {
    if (v == 0.0) v = 0.0; // normalize -0
    char buf[40];
    std::snprintf(buf, sizeof buf, "%.9g", v);
    return buf;
}
} // namespace

std::string to_jsonl_line(const EpochLogitRecord& r) {
    std::string out = "{\"id\":\"";
    out += r.example_id;
    out += "\",\"epoch\":";
    out += std::to_string(r.epoch);
    out += ",\"logits\":[";
    out += fmt_real(r.logits[0]);
    out += ",";
    out += fmt_real(r.logits[1]);
    out += "],\"gold\":";
    out += std::to_string(r.gold);
    out += "}";
    return out;
}

void DynamicsLog::append(const EpochLogitRecord& record) {
    if (!std::isfinite(record.logits[0]) || !std::isfinite(record.logits[1]))
        throw DataError("dynamics record " + record.example_id + " epoch " +
                        std::to_string(record.epoch) + " has non-finite logits");
    auto key = std::make_pair(record.example_id, record.epoch);
    if (seen_.count(key) != 0)
        throw DataError("duplicate dynamics record for id " + record.example_id + " epoch " +
                        std::to_string(record.epoch));
    seen_.emplace(key, true);
    records_.push_back(record);
}

std::string DynamicsLog::to_jsonl() const {
    std::string out;
    for (const auto& r : records_) {
        out += to_jsonl_line(r);
        out.push_back('\n');
    }
    return out;
}

void DynamicsLog::write_jsonl(const std::string& path) const {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write dynamics log: " + path);
    out << to_jsonl();
    if (!out) throw DataError("write failed: " + path);
}

DynamicsLog DynamicsLog::from_jsonl(const std::string& text) {
    DynamicsLog log;
    std::istringstream in(text);
    std::string line;
    size_t row = 0;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        nlohmann::json j;
        try {
            j = nlohmann::json::parse(line);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("dynamics log line " + std::to_string(row) + ": " + e.what());
        }
        try {
            EpochLogitRecord r;
            r.example_id = j.at("id").get<std::string>();
            r.epoch = j.at("epoch").get<int>();
            auto logits = j.at("logits");
            if (!logits.is_array() || logits.size() != 2)
                throw DataError("logits must be a 2-array");
            r.logits = {logits[0].get<double>(), logits[1].get<double>()};
            r.gold = j.at("gold").get<int>();
            if (r.gold != 0 && r.gold != 1) throw DataError("gold must be 0 or 1");
            if (r.epoch < 0) throw DataError("epoch must be >= 0");
            log.append(r);
        } catch (const nlohmann::json::exception& e) {
            throw DataError("dynamics log line " + std::to_string(row) + ": " + e.what());
        } catch (const DataError& e) {
            throw DataError("dynamics log line " + std::to_string(row) + ": " + e.what());
        }
    }
    return log;
}

DynamicsLog DynamicsLog::load_jsonl(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open dynamics log: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return from_jsonl(ss.str());
}

void record_epoch(const model::ParameterSet& params,
                  const std::vector<features::FeaturizedExample>& trainset, int epoch,
                  DynamicsLog& sink) {
    // ascending id order, independent of training shuffle
    std::vector<const features::FeaturizedExample*> ordered;
    ordered.reserve(trainset.size());
    for (const auto& ex : trainset) ordered.push_back(&ex);
    std::sort(ordered.begin(), ordered.end(),
              [](const auto* a, const auto* b) { return a->id < b->id; });

    constexpr size_t kEvalBatch = 64;
    for (size_t start = 0; start < ordered.size(); start += kEvalBatch) {
        const size_t end = std::min(ordered.size(), start + kEvalBatch);
        std::vector<const features::FeaturizedExample*> batch(ordered.begin() + static_cast<long>(start),
                                                              ordered.begin() + static_cast<long>(end));
        model::ForwardTrace trace;
        model::forward(params, batch, model::Mode::eval, nullptr, trace);
        for (size_t b = 0; b < batch.size(); ++b) {
            EpochLogitRecord r;
            r.example_id = batch[b]->id;
            r.epoch = epoch;
            r.logits = {trace.logits[b * 2], trace.logits[b * 2 + 1]};
            r.gold = batch[b]->gold;
            sink.append(r);
        }
    }
}

double confidence(const std::vector<double>& gold_probs) {
    if (gold_probs.empty()) throw DataError("confidence: empty sequence");
    double s = 0.0;
    for (double p : gold_probs) s += p;
    return s / static_cast<double>(gold_probs.size());
}

double variability(const std::vector<double>& gold_probs) {
    if (gold_probs.empty()) throw DataError("variability: empty sequence");
    const double mean = confidence(gold_probs);
    double s = 0.0;
    for (double p : gold_probs) s += (p - mean) * (p - mean);
    return std::sqrt(s / static_cast<double>(gold_probs.size()));
}

double correctness(const std::vector<EpochLogitRecord>& records) {
    if (records.empty()) throw DataError("correctness: empty sequence");
    int right = 0;
    for (const auto& r : records) {
        const int pred = r.logits[1] > r.logits[0] ? 1 : 0;
        if (pred == r.gold) ++right;
    }
    return static_cast<double>(right) / static_cast<double>(records.size());
}

std::vector<DynamicsSummary> summarize(const DynamicsLog& log) {
    if (log.records().empty()) throw DataError("summarize: empty log");

    int max_epoch = 0;
    for (const auto& r : log.records()) max_epoch = std::max(max_epoch, r.epoch);
    const int epochs = max_epoch + 1;

    std::map<std::string, std::vector<EpochLogitRecord>> by_id;
    for (const auto& r : log.records()) by_id[r.example_id].push_back(r);

    // completeness: every id must hold exactly one record per epoch
    std::string missing;
    int missing_count = 0;
    for (auto& [id, recs] : by_id) {
        std::set<int> seen;
        for (const auto& r : recs) seen.insert(r.epoch);
        for (int e = 0; e < epochs; ++e) {
            if (seen.count(e) == 0) {
                if (missing_count < 20)
                    missing += " (" + id + ", " + std::to_string(e) + ")";
                ++missing_count;
            }
        }
    }
    if (missing_count > 0)
        throw DataError("incomplete dynamics log; missing" + missing +
                        (missing_count > 20 ? " ... " + std::to_string(missing_count) + " total"
                                            : ""));

    std::vector<DynamicsSummary> out;
    out.reserve(by_id.size());
    for (auto& [id, recs] : by_id) {
        std::sort(recs.begin(), recs.end(),
                  [](const auto& a, const auto& b) { return a.epoch < b.epoch; });
        for (size_t i = 1; i < recs.size(); ++i)
            if (recs[i].gold != recs[0].gold)
                throw DataError("inconsistent gold label for id " + id);
        std::vector<double> probs;
        probs.reserve(recs.size());
        for (const auto& r : recs) {
            auto pr = model::softmax2(r.logits[0], r.logits[1]);
            probs.push_back(pr[static_cast<size_t>(r.gold)]);
        }
        DynamicsSummary s;
        s.example_id = id;
        s.confidence = confidence(probs);
        s.variability = variability(probs);
        s.correctness = correctness(recs);
        out.push_back(std::move(s));
    }
    return out; // std::map iteration: already sorted by id
}

namespace {
// ceil(fraction*N) with a tolerance for the fraction's decimal-to-binary
// rounding, so 0.29 * 100 selects 29, not 30.
size_t selection_size(double fraction, size_t n) {
    double k = std::ceil(fraction * static_cast<double>(n) - 1e-9);
    if (k < 0.0) k = 0.0;
    if (k > static_cast<double>(n)) k = static_cast<double>(n);
    return static_cast<size_t>(k);
}
} // namespace

std::vector<std::string> select_subset(const std::vector<DynamicsSummary>& summaries,
                                       const SelectionSpec& spec) {
    if (spec.fraction < 0.0 || spec.fraction > 1.0)
        throw DataError("selection fraction must be in [0,1]");

    std::vector<const DynamicsSummary*> order;
    order.reserve(summaries.size());
    for (const auto& s : summaries) order.push_back(&s);

    auto key_less = [&spec](const DynamicsSummary* a, const DynamicsSummary* b) {
        double ka, kb;
        switch (spec.region) {
        case Region::ambiguous: // variability descending
            ka = -a->variability;
            kb = -b->variability;
            break;
        case Region::easy: // confidence descending
            ka = -a->confidence;
            kb = -b->confidence;
            break;
        default: // hard: confidence ascending
            ka = a->confidence;
            kb = b->confidence;
        }
        if (ka != kb) return ka < kb;
        return a->example_id < b->example_id;
    };
    std::sort(order.begin(), order.end(), key_less);

    const size_t k = selection_size(spec.fraction, order.size());
    std::vector<std::string> ids;
    ids.reserve(k);
    for (size_t i = 0; i < k; ++i) ids.push_back(order[i]->example_id);
    return ids;
}

std::vector<std::string> mix_subsets(const std::vector<std::string>& a,
                                     const std::vector<std::string>& b) {
    std::set<std::string> u(a.begin(), a.end());
    u.insert(b.begin(), b.end());
    return {u.begin(), u.end()};
}

RegionLabeling label_regions(const std::vector<DynamicsSummary>& summaries) {
    if (summaries.size() < 3) throw DataError("label_regions needs at least 3 summaries");
    const size_t n = summaries.size();

    std::vector<const DynamicsSummary*> order;
    order.reserve(n);
    for (const auto& s : summaries) order.push_back(&s);
    std::sort(order.begin(), order.end(), [](const auto* a, const auto* b) {
        if (a->variability != b->variability) return a->variability > b->variability;
        return a->example_id < b->example_id;
    });

    RegionLabeling labels;
    const size_t n_ambiguous = n / 3;
    for (size_t i = 0; i < n_ambiguous; ++i) labels[order[i]->example_id] = Region::ambiguous;

    std::vector<const DynamicsSummary*> rest(order.begin() + static_cast<long>(n_ambiguous),
                                             order.end());
    std::sort(rest.begin(), rest.end(), [](const auto* a, const auto* b) {
        if (a->confidence != b->confidence) return a->confidence > b->confidence;
        return a->example_id < b->example_id;
    });
    const size_t n_easy = (rest.size() + 1) / 2;
    for (size_t i = 0; i < rest.size(); ++i)
        labels[rest[i]->example_id] = i < n_easy ? Region::easy : Region::hard;
    return labels;
}

std::vector<DensityBin> density_histogram(const std::vector<DynamicsSummary>& summaries,
                                          Dimension dimension, int bins) {
    if (bins < 1) throw DataError("density_histogram: bins must be >= 1");
    std::vector<DensityBin> out(static_cast<size_t>(bins));
    const double width = 1.0 / bins;
    for (int i = 0; i < bins; ++i) out[static_cast<size_t>(i)].bin_start = i * width;
    for (const auto& s : summaries) {
        double v;
        switch (dimension) {
        case Dimension::confidence: v = s.confidence; break;
        case Dimension::variability: v = s.variability; break;
        default: v = s.correctness;
        }
        int b = static_cast<int>(v * bins);
        if (b >= bins) b = bins - 1; // last bin closed at 1.0
        if (b < 0) b = 0;
        ++out[static_cast<size_t>(b)].count;
    }
    return out;
}

// --- summaries.csv -----------------------------------------------------------

std::string summaries_to_csv(const std::vector<DynamicsSummary>& summaries) {
    std::string out = "id,confidence,variability,correctness\n";
    char buf[128];
    for (const auto& s : summaries) {
        std::snprintf(buf, sizeof buf, "%s,%.6f,%.6f,%.6f\n", s.example_id.c_str(), s.confidence,
                      s.variability, s.correctness);
        out += buf;
    }
    return out;
}

std::vector<DynamicsSummary> summaries_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    if (!std::getline(in, line) || line != "id,confidence,variability,correctness")
        throw DataError("summaries csv: bad header");
    std::vector<DynamicsSummary> out;
    size_t row = 1;
    while (std::getline(in, line)) {
        ++row;
        if (line.empty()) continue;
        std::vector<std::string> cols;
        size_t start = 0;
        while (true) {
            size_t pos = line.find(',', start);
            if (pos == std::string::npos) {
                cols.push_back(line.substr(start));
                break;
            }
            cols.push_back(line.substr(start, pos - start));
            start = pos + 1;
        }
        if (cols.size() != 4)
            throw DataError("summaries csv row " + std::to_string(row) + ": expected 4 columns");
        DynamicsSummary s;
        s.example_id = cols[0];
        try {
            s.confidence = std::stod(cols[1]);
            s.variability = std::stod(cols[2]);
            s.correctness = std::stod(cols[3]);
        } catch (const std::exception&) {
            throw DataError("summaries csv row " + std::to_string(row) + ": bad number");
        }
        out.push_back(std::move(s));
    }
    return out;
}

void write_summaries_csv(const std::string& path, const std::vector<DynamicsSummary>& summaries) {
    std::ofstream out(path, std::ios::binary);
    if (!out) throw DataError("cannot write summaries: " + path);
    out << summaries_to_csv(summaries);
    if (!out) throw DataError("write failed: " + path);
}

std::vector<DynamicsSummary> load_summaries_csv(const std::string& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) throw DataError("cannot open summaries: " + path);
    std::stringstream ss;
    ss << in.rdbuf();
    return summaries_from_csv(ss.str());
}

} // namespace cartograf::dynamics

#pragma once

#include "core/audio.hpp"
#include "core/vision.hpp"

#include <cstdint>
#include <filesystem>
#include <string>
#include <variant>
#include <vector>

namespace opf::evalkit {

struct LabeledSample {
    std::string label;     // identity the sample belongs to
    std::string source_id; // file stem or synth clip id
    std::variant<audio::AudioSignature, vision::ColorHistogram> feature;
};

enum class MatrixKind { sample_level, identity_average };

// Square symmetric distance matrix. NaN marks an absent entry (an identity
// average with no contributing pairs).
struct DistanceMatrix {
    MatrixKind kind = MatrixKind::sample_level;
    std::vector<std::string> labels;     // identity per row/col
    std::vector<std::string> source_ids; // per row/col, sample_level only
    std::vector<double> values;          // row-major, size() * size()

    size_t size() const { return labels.size(); }
    double at(size_t i, size_t j) const { return values[i * labels.size() + j]; }
    void set(size_t i, size_t j, double v) { values[i * labels.size() + j] = v; }
    bool absent(size_t i, size_t j) const;
    // "label|id" at sample level, plain label for identity averages
    std::string header(size_t i) const;
};

DistanceMatrix distance_matrix(const std::vector<LabeledSample>& samples);
DistanceMatrix identity_average_matrix(const DistanceMatrix& m);

struct IdentityAccuracy {
    std::string label;
    size_t within_pairs = 0;
    size_t within_correct = 0;
    size_t cross_pairs = 0;
    size_t cross_correct = 0;
    double accuracy = 0.0; // over all pairs involving the identity
};

struct AccuracyReport {
    double threshold = 0.0;
    size_t pair_count = 0;
    size_t true_positives = 0;
    size_t true_negatives = 0;
    size_t false_positives = 0;
    size_t false_negatives = 0;
    double accuracy = 0.0;
    std::vector<IdentityAccuracy> per_identity;
};

// Unordered-pair accuracy: a pair is correct when its distance lands on the
// matching side of the threshold (same identity at or under, different above).
AccuracyReport pairwise_accuracy(const DistanceMatrix& m, double threshold);

struct Calibration {
    double threshold = 0.0;
    double accuracy = 0.0;
};

// Best threshold over the midpoints of adjacent observed distances; ties go
// to the smallest candidate.
Calibration calibrate_threshold(const DistanceMatrix& m);

std::string matrix_to_csv(const DistanceMatrix& m);
DistanceMatrix matrix_from_csv(const std::string& text);
void write_matrix_csv(const DistanceMatrix& m, const std::filesystem::path& path);
DistanceMatrix read_matrix_csv(const std::filesystem::path& path);

std::string accuracy_report_text(const AccuracyReport& r);
std::string accuracy_report_csv(const AccuracyReport& r);

} // namespace opf::evalkit

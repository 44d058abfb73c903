#include "evalkit/matrix.hpp"

#include "core/errors.hpp"

#include <algorithm>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <limits>
#include <map>
#include <sstream>

namespace opf::evalkit {
namespace {

constexpr double kNaN = std::numeric_limits<double>::quiet_NaN();

std::string format_value(double v) {
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", v);
    return buf;
}

} // namespace

bool DistanceMatrix::absent(size_t i, size_t j) const {
    return std::isnan(at(i, j));
}

std::string DistanceMatrix::header(size_t i) const {
    if (kind == MatrixKind::sample_level)
        return labels[i] + "|" + source_ids[i];
    return labels[i];
}

DistanceMatrix distance_matrix(const std::vector<LabeledSample>& samples) {
    if (samples.size() < 2)
        raise(Errc::invalid_argument, "need at least 2 samples for a distance matrix");
    for (const auto& s : samples)
        if (s.label.empty())
            raise(Errc::invalid_argument, "sample with empty label");

    size_t kind_index = samples.front().feature.index();
    for (const auto& s : samples)
        if (s.feature.index() != kind_index)
            raise(Errc::heterogeneous_corpus, "corpus mixes audio and visual features");

    size_t n = samples.size();
    DistanceMatrix m;
    m.kind = MatrixKind::sample_level;
    m.labels.reserve(n);
    m.source_ids.reserve(n);
    for (const auto& s : samples) {
        m.labels.push_back(s.label);
        m.source_ids.push_back(s.source_id);
    }
    m.values.assign(n * n, 0.0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            double d;
            if (kind_index == 0) {
                d = audio::audio_distance(std::get<audio::AudioSignature>(samples[i].feature),
                                          std::get<audio::AudioSignature>(samples[j].feature));
            } else {
                d = vision::bhattacharyya_distance(
                    std::get<vision::ColorHistogram>(samples[i].feature),
                    std::get<vision::ColorHistogram>(samples[j].feature));
            }
            m.set(i, j, d);
            m.set(j, i, d);
        }
    }
    return m;
}

DistanceMatrix identity_average_matrix(const DistanceMatrix& m) {
    if (m.kind != MatrixKind::sample_level)
        raise(Errc::invalid_argument, "identity averages need a sample-level matrix");
    size_t n = m.size();

    std::vector<std::string> identities;
    std::map<std::string, size_t> index;
    for (const auto& label : m.labels) {
        if (index.emplace(label, identities.size()).second)
            identities.push_back(label);
    }

    size_t g = identities.size();
    std::vector<double> sums(g * g, 0.0);
    std::vector<size_t> counts(g * g, 0);
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = 0; j < n; ++j) {
            if (i == j)
                continue;
            size_t a = index[m.labels[i]];
            size_t b = index[m.labels[j]];
            if (m.absent(i, j))
                continue;
            sums[a * g + b] += m.at(i, j);
            counts[a * g + b] += 1;
        }
    }

    DistanceMatrix out;
    out.kind = MatrixKind::identity_average;
    out.labels = identities;
    out.values.assign(g * g, kNaN);
    for (size_t a = 0; a < g; ++a)
        for (size_t b = 0; b < g; ++b)
            if (counts[a * g + b] > 0)
                out.values[a * g + b] =
                    sums[a * g + b] / static_cast<double>(counts[a * g + b]);
    return out;
}

AccuracyReport pairwise_accuracy(const DistanceMatrix& m, double threshold) {
    if (m.kind != MatrixKind::sample_level)
        raise(Errc::invalid_argument, "pairwise accuracy needs a sample-level matrix");
    AccuracyReport r;
    r.threshold = threshold;

    std::vector<std::string> identities;
    std::map<std::string, size_t> index;
    for (const auto& label : m.labels)
        if (index.emplace(label, identities.size()).second)
            identities.push_back(label);
    std::vector<IdentityAccuracy> per(identities.size());
    for (size_t k = 0; k < identities.size(); ++k)
        per[k].label = identities[k];

    size_t n = m.size();
    size_t correct = 0;
    for (size_t i = 0; i < n; ++i) {
        for (size_t j = i + 1; j < n; ++j) {
            if (m.absent(i, j))
                continue;
            double d = m.at(i, j);
            bool same = m.labels[i] == m.labels[j];
            bool under = d <= threshold;
            bool ok = same == under;
            r.pair_count += 1;
            if (ok)
                correct += 1;
            if (same && under)
                r.true_positives += 1;
            else if (same && !under)
                r.false_negatives += 1;
            else if (!same && under)
                r.false_positives += 1;
            else
                r.true_negatives += 1;

            IdentityAccuracy& pa = per[index[m.labels[i]]];
            IdentityAccuracy& pb = per[index[m.labels[j]]];
            if (same) {
                pa.within_pairs += 1;
                if (ok)
                    pa.within_correct += 1;
            } else {
                pa.cross_pairs += 1;
                pb.cross_pairs += 1;
                if (ok) {
                    pa.cross_correct += 1;
                    pb.cross_correct += 1;
                }
            }
        }
    }
    r.accuracy = r.pair_count ? static_cast<double>(correct) / static_cast<double>(r.pair_count)
                              : 0.0;
    for (auto& p : per) {
        size_t pairs = p.within_pairs + p.cross_pairs;
        size_t good = p.within_correct + p.cross_correct;
        p.accuracy = pairs ? static_cast<double>(good) / static_cast<double>(pairs) : 0.0;
    }
    r.per_identity = std::move(per);
    return r;
}

Calibration calibrate_threshold(const DistanceMatrix& m) {
    if (m.kind != MatrixKind::sample_level)
        raise(Errc::invalid_argument, "calibration needs a sample-level matrix");
    std::vector<double> distances;
    size_t n = m.size();
    for (size_t i = 0; i < n; ++i)
        for (size_t j = i + 1; j < n; ++j)
            if (!m.absent(i, j))
                distances.push_back(m.at(i, j));
    if (distances.empty())
        raise(Errc::invalid_argument, "no pairs to calibrate on");
    std::sort(distances.begin(), distances.end());
    distances.erase(std::unique(distances.begin(), distances.end()), distances.end());

    std::vector<double> candidates;
    candidates.push_back(distances.front() / 2.0);
    for (size_t k = 0; k + 1 < distances.size(); ++k)
        candidates.push_back((distances[k] + distances[k + 1]) / 2.0);
    candidates.push_back(distances.back() + 1.0);

    Calibration best;
    best.threshold = candidates.front();
    best.accuracy = -1.0;
    for (double c : candidates) {
        AccuracyReport r = pairwise_accuracy(m, c);
        if (r.accuracy > best.accuracy) {
            best.accuracy = r.accuracy;
            best.threshold = c;
        }
    }
    return best;
}

std::string matrix_to_csv(const DistanceMatrix& m) {
    std::ostringstream out;
    size_t n = m.size();
    for (size_t j = 0; j < n; ++j)
        out << ',' << m.header(j);
    out << '\n';
    for (size_t i = 0; i < n; ++i) {
        out << m.header(i);
        for (size_t j = 0; j < n; ++j) {
            out << ',';
            if (m.absent(i, j))
                out << '-';
            else
                out << format_value(m.at(i, j));
        }
        out << '\n';
    }
    return out.str();
}

namespace {

std::vector<std::string> split_csv_line(const std::string& line) {
    std::vector<std::string> cells;
    std::string cur;
    for (char c : line) {
        if (c == ',') {
            cells.push_back(cur);
            cur.clear();
        } else if (c != '\r') {
            cur.push_back(c);
        }
    }
    cells.push_back(cur);
    return cells;
}

bool is_absent_cell(std::string s) {
    std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
    return s.empty() || s == "-" || s == "nan";
}

double parse_cell(const std::string& s) {
    size_t pos = 0;
    double v;
    try {
        v = std::stod(s, &pos);
    } catch (const std::exception&) {
        raise(Errc::parse, "bad matrix cell: " + s);
    }
    if (pos != s.size())
        raise(Errc::parse, "bad matrix cell: " + s);
    return v;
}

} // namespace

DistanceMatrix matrix_from_csv(const std::string& text) {
    std::istringstream in(text);
    std::string line;
    std::vector<std::vector<std::string>> rows;
    while (std::getline(in, line)) {
        if (line.empty() || line == "\r")
            continue;
        rows.push_back(split_csv_line(line));
    }
    if (rows.size() < 2)
        raise(Errc::parse, "matrix csv needs a header row and at least one data row");

    const auto& head = rows.front();
    if (!head.front().empty())
        raise(Errc::parse, "matrix csv must start with an empty corner cell");
    size_t n = head.size() - 1;
    if (n == 0)
        raise(Errc::parse, "matrix csv has no columns");
    if (rows.size() - 1 != n)
        raise(Errc::parse, "matrix csv is not square");

    DistanceMatrix m;
    bool sample_level = false;
    for (size_t j = 0; j < n; ++j)
        if (head[j + 1].find('|') != std::string::npos)
            sample_level = true;
    m.kind = sample_level ? MatrixKind::sample_level : MatrixKind::identity_average;
    for (size_t j = 0; j < n; ++j) {
        const std::string& h = head[j + 1];
        if (h.empty())
            raise(Errc::parse, "empty matrix header");
        if (sample_level) {
            size_t bar = h.find('|');
            if (bar == std::string::npos || bar == 0)
                raise(Errc::parse, "sample-level header without label|id form: " + h);
            m.labels.push_back(h.substr(0, bar));
            m.source_ids.push_back(h.substr(bar + 1));
        } else {
            m.labels.push_back(h);
        }
    }

    m.values.assign(n * n, kNaN);
    for (size_t i = 0; i < n; ++i) {
        const auto& row = rows[i + 1];
        if (row.size() != n + 1)
            raise(Errc::parse, "matrix csv row " + std::to_string(i + 1) + " has wrong width");
        std::string expected = sample_level ? m.labels[i] + "|" + m.source_ids[i] : m.labels[i];
        if (row.front() != expected)
            raise(Errc::parse, "matrix csv row header mismatch: " + row.front());
        for (size_t j = 0; j < n; ++j) {
            if (is_absent_cell(row[j + 1]))
                continue;
            m.values[i * n + j] = parse_cell(row[j + 1]);
        }
    }
    return m;
}

void write_matrix_csv(const DistanceMatrix& m, const std::filesystem::path& path) {
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out)
        raise(Errc::io, "cannot write " + path.string());
    out << matrix_to_csv(m);
    if (!out)
        raise(Errc::io, "short write to " + path.string());
}

DistanceMatrix read_matrix_csv(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in)
        raise(Errc::io, "cannot open " + path.string());
    std::ostringstream buf;
    buf << in.rdbuf();
    return matrix_from_csv(buf.str());
}

std::string accuracy_report_text(const AccuracyReport& r) {
    std::ostringstream out;
    out << "threshold: " << format_value(r.threshold) << '\n';
    out << "pairs: " << r.pair_count << '\n';
    out << "accuracy: " << format_value(r.accuracy) << '\n';
    out << "true_positives: " << r.true_positives << '\n';
    out << "true_negatives: " << r.true_negatives << '\n';
    out << "false_positives: " << r.false_positives << '\n';
    out << "false_negatives: " << r.false_negatives << '\n';
    for (const auto& p : r.per_identity) {
        out << "identity " << p.label << ": accuracy " << format_value(p.accuracy) << " (within "
            << p.within_correct << '/' << p.within_pairs << ", cross " << p.cross_correct << '/'
            << p.cross_pairs << ")\n";
    }
    return out.str();
}

std::string accuracy_report_csv(const AccuracyReport& r) {
    std::ostringstream out;
    out << "identity,within_correct,within_pairs,cross_correct,cross_pairs,accuracy\n";
    out << "(all)," << r.true_positives << ',' << (r.true_positives + r.false_negatives) << ','
        << r.true_negatives << ',' << (r.true_negatives + r.false_positives) << ','
        << format_value(r.accuracy) << '\n';
    for (const auto& p : r.per_identity) {
        out << p.label << ',' << p.within_correct << ',' << p.within_pairs << ','
            << p.cross_correct << ',' << p.cross_pairs << ',' << format_value(p.accuracy) << '\n';
    }
    return out.str();
}

} // namespace opf::evalkit

#pragma once

#include <cstddef>
#include <string>
#include <vector>

namespace cvest {

// One scenario measured on both platforms: expensive target metric f plus the
// cheap surrogate vector g, optionally with scenario features phi.
struct PairedSample {
    std::string scenario_id;
    double f = 0.0;
    std::vector<double> g;
    std::vector<double> phi;
};

// A scenario where only the surrogate platform was run.
struct SurrogateSample {
    std::string scenario_id;
    std::vector<double> g;
    std::vector<double> phi;
};

struct PairedDataset {
    std::vector<PairedSample> samples;
    std::size_t d = 0; // surrogate dimension, shared by all samples
    std::size_t m = 0; // feature dimension, shared by all samples (0 = none)

    std::size_t n() const { return samples.size(); }
    std::vector<double> f_values() const;
};

struct SurrogateDataset {
    std::vector<SurrogateSample> samples;
    std::size_t d = 0;
    std::size_t m = 0;

    std::size_t k() const { return samples.size(); }
};

enum class MetricKind { continuous, binary };

// CSV header names; JSONL keys are fixed (scenario_id, f, g, phi).
struct ColumnSchema {
    std::string scenario_id = "scenario_id";
    std::string f = "F";
    std::string g_prefix = "G_";
    std::string phi_prefix = "PHI_";
};

// Loaders pick the format from the file extension: ".csv" or ".jsonl".
// Malformed rows and non-finite values are hard errors (silently dropping
// rows would bias the estimators).
PairedDataset load_paired(const std::string& path, const ColumnSchema& schema = {});
SurrogateDataset load_surrogate(const std::string& path, const ColumnSchema& schema = {});

void save_paired(const PairedDataset& ds, const std::string& path,
                 const ColumnSchema& schema = {});
void save_surrogate(const SurrogateDataset& ds, const std::string& path,
                    const ColumnSchema& schema = {});

// Throws DimensionMismatch unless the surrogate pool's d matches the paired
// set's. Feature dimensions must additionally match when the downstream
// pipeline consumes phi (features_required).
void check_compatibility(const PairedDataset& paired, const SurrogateDataset& surrogate,
                         bool features_required = false);

// Throws if f is outside {0,1} anywhere; used by the binary-metric MCF path.
void check_binary_metric(const PairedDataset& ds);

// Structural validation shared by loaders and synthetic generators: per-sample
// lengths against (d, m) and finiteness everywhere.
void validate_paired(const PairedDataset& ds);
void validate_surrogate(const SurrogateDataset& ds);

} // namespace cvest

// Rank-correlation and accuracy metrics against ground-truth labels, plus
// aggregation of per-run statistics into mean +/- sample std.

#pragma once

#include <optional>
#include <stdexcept>
#include <vector>

#include "codejudge/model.hpp"

namespace codejudge {

class StatsError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Either vector constant, so the rank correlation is undefined.
class DegenerateSample : public StatsError {
public:
    using StatsError::StatsError;
};

class LengthMismatch : public StatsError {
public:
    using StatsError::StatsError;
};

class EmptySample : public StatsError {
public:
    using StatsError::StatsError;
};

// Runs disagree on which metrics are present.
class HeterogeneousRuns : public StatsError {
public:
    using StatsError::StatsError;
};

// Predictions paired with ground-truth labels; equal lengths, no gaps
// (candidates with unrecoverable parse failures are excluded upstream).
struct PairedSample {
    std::vector<double> predictions;
    std::vector<double> labels;

    std::size_t size() const { return predictions.size(); }
};

// Kendall's tau-b: (C - D) / sqrt((C + D + Tx)(C + D + Ty)) with C/D the
// concordant/discordant pair counts and Tx/Ty the single-sided tie counts.
// Throws DegenerateSample when either vector is constant, LengthMismatch /
// EmptySample on malformed input (n >= 2 required).
double kendall_tau(const PairedSample& sample);

// Spearman's rho: Pearson correlation of mid-ranks (ties get the average of
// the ranks they span). Same error contract as kendall_tau.
double spearman_rho(const PairedSample& sample);

// Fraction of exact matches between {0,1} predictions and {0,1} labels.
double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels);

// Metrics for one evaluation run. accuracy is present iff the dataset labels
// are binary; correlations are absent when the run sample was degenerate.
struct RunStatistics {
    std::optional<double> accuracy;
    std::optional<double> kendall_tau;
    std::optional<double> spearman_rho;
    int excluded_count = 0;
};

struct MeanStd {
    double mean = 0.0;
    double std_dev = 0.0;  // sample std (n-1); exactly 0 for a single run
};

struct AggregateStatistics {
    std::optional<MeanStd> accuracy;
    std::optional<MeanStd> kendall_tau;
    std::optional<MeanStd> spearman_rho;
    int run_count = 0;
};

// Per-metric sample mean and sample standard deviation across runs. All runs
// must agree on metric presence; otherwise HeterogeneousRuns. Empty input is
// EmptySample.
AggregateStatistics aggregate_runs(const std::vector<RunStatistics>& stats);

// Binary-accuracy protocol for graded methods: only the full rating counts
// as correct.
int grade_to_binary(double rating);               // 1 iff rating == 4
int grade_to_binary(const CorrectnessScore& s);   // 1 iff value == 1.0 (zero penalty)

}  // namespace codejudge

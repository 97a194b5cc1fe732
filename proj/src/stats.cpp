#include "codejudge/stats.hpp"

#include <algorithm>
#include <cmath>
#include <numeric>

namespace codejudge {

namespace {

void check_paired(const PairedSample& sample) {
    if (sample.predictions.size() != sample.labels.size()) {
        throw LengthMismatch("predictions and labels differ in length");
    }
    if (sample.size() < 2) {
        throw EmptySample("correlation needs at least two paired observations");
    }
}

bool is_constant(const std::vector<double>& values) {
    return std::all_of(values.begin(), values.end(),
                       [&](double v) { return v == values.front(); });
}

void check_nondegenerate(const PairedSample& sample) {
    if (is_constant(sample.predictions)) {
        throw DegenerateSample("prediction vector is constant");
    }
    if (is_constant(sample.labels)) {
        throw DegenerateSample("label vector is constant");
    }
}

// Sum over tie groups of t*(t-1)/2.
double tied_pair_count(std::vector<double> values) {
    std::sort(values.begin(), values.end());
    double total = 0.0;
    std::size_t i = 0;
    while (i < values.size()) {
        std::size_t j = i;
        while (j < values.size() && values[j] == values[i]) ++j;
        const double t = static_cast<double>(j - i);
        total += t * (t - 1.0) / 2.0;
        i = j;
    }
    return total;
}

// Mid-ranks: tied values share the average of the ranks they occupy.
std::vector<double> mid_ranks(const std::vector<double>& values) {
    const std::size_t n = values.size();
    std::vector<std::size_t> order(n);
    std::iota(order.begin(), order.end(), std::size_t{0});
    std::sort(order.begin(), order.end(),
              [&](std::size_t a, std::size_t b) { return values[a] < values[b]; });

    std::vector<double> ranks(n);
    std::size_t i = 0;
    while (i < n) {
        std::size_t j = i;
        while (j < n && values[order[j]] == values[order[i]]) ++j;
        const double shared = (static_cast<double>(i) + static_cast<double>(j - 1)) / 2.0 + 1.0;
        for (std::size_t k = i; k < j; ++k) ranks[order[k]] = shared;
        i = j;
    }
    return ranks;
}

double pearson(const std::vector<double>& x, const std::vector<double>& y) {
    const std::size_t n = x.size();
    const double mean_x = std::accumulate(x.begin(), x.end(), 0.0) / static_cast<double>(n);
    const double mean_y = std::accumulate(y.begin(), y.end(), 0.0) / static_cast<double>(n);

    double sxy = 0.0;
    double sxx = 0.0;
    double syy = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        const double dx = x[i] - mean_x;
        const double dy = y[i] - mean_y;
        sxy += dx * dy;
        sxx += dx * dx;
        syy += dy * dy;
    }
    return sxy / std::sqrt(sxx * syy);
}

MeanStd mean_and_std(const std::vector<double>& values) {
    const double n = static_cast<double>(values.size());
    const double mean = std::accumulate(values.begin(), values.end(), 0.0) / n;
    if (values.size() < 2) return {mean, 0.0};
    double ss = 0.0;
    for (double v : values) ss += (v - mean) * (v - mean);
    return {mean, std::sqrt(ss / (n - 1.0))};
}

}  // namespace

double kendall_tau(const PairedSample& sample) {
    check_paired(sample);
    check_nondegenerate(sample);

    const auto& x = sample.predictions;
    const auto& y = sample.labels;
    const std::size_t n = x.size();

    double concordant_minus_discordant = 0.0;
    for (std::size_t i = 0; i < n; ++i) {
        for (std::size_t j = i + 1; j < n; ++j) {
            const double dx = x[i] - x[j];
            const double dy = y[i] - y[j];
            const double product = dx * dy;
            if (product > 0.0) {
                concordant_minus_discordant += 1.0;
            } else if (product < 0.0) {
                concordant_minus_discordant -= 1.0;
            }
        }
    }

    // tau-b via tie-group counts: n0 - n1 = C + D + Ty, n0 - n2 = C + D + Tx.
    const double n0 = static_cast<double>(n) * (static_cast<double>(n) - 1.0) / 2.0;
    const double n1 = tied_pair_count(x);
    const double n2 = tied_pair_count(y);
    return concordant_minus_discordant / std::sqrt((n0 - n1) * (n0 - n2));
}

double spearman_rho(const PairedSample& sample) {
    check_paired(sample);
    check_nondegenerate(sample);
    return pearson(mid_ranks(sample.predictions), mid_ranks(sample.labels));
}

double accuracy(const std::vector<int>& predictions, const std::vector<int>& labels) {
    if (predictions.size() != labels.size()) {
        throw LengthMismatch("predictions and labels differ in length");
    }
    if (predictions.empty()) {
        throw EmptySample("accuracy of an empty sample is undefined");
    }
    std::size_t matches = 0;
    for (std::size_t i = 0; i < predictions.size(); ++i) {
        if (predictions[i] == labels[i]) ++matches;
    }
    return static_cast<double>(matches) / static_cast<double>(predictions.size());
}

AggregateStatistics aggregate_runs(const std::vector<RunStatistics>& stats) {
    if (stats.empty()) {
        throw EmptySample("no runs to aggregate");
    }

    auto collect = [&](auto field) -> std::optional<MeanStd> {
        const bool first_present = (stats.front().*field).has_value();
        std::vector<double> values;
        for (const auto& run : stats) {
            if ((run.*field).has_value() != first_present) {
                throw HeterogeneousRuns("runs disagree on metric presence");
            }
            if (first_present) values.push_back(*(run.*field));
        }
        if (!first_present) return std::nullopt;
        return mean_and_std(values);
    };

    AggregateStatistics aggregate;
    aggregate.accuracy = collect(&RunStatistics::accuracy);
    aggregate.kendall_tau = collect(&RunStatistics::kendall_tau);
    aggregate.spearman_rho = collect(&RunStatistics::spearman_rho);
    aggregate.run_count = static_cast<int>(stats.size());
    return aggregate;
}

int grade_to_binary(double rating) {
    return rating == 4.0 ? 1 : 0;
}

int grade_to_binary(const CorrectnessScore& s) {
    return s.penalty_points == 0 ? 1 : 0;
}

}  // namespace codejudge

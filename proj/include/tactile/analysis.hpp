#pragma once

#include <tactile/records.hpp>

#include <optional>
#include <span>
#include <string>
#include <vector>

namespace tactile {

struct DistanceSummary
{
	double distance = 0.0; // m
	int n = 0;
	int n_correct = 0;
	double proportion = 0.0;

	friend bool operator==(const DistanceSummary&, const DistanceSummary&) = default;
};

/// Two-alternative forced choice psychometric function with guess rate 0.5 and no lapses:
///   p(d) = 0.5 + 0.5 / (1 + exp(-slope * (d - threshold)))
/// so p(threshold) = 0.75.
struct PsychometricFit
{
	double threshold = 0.0; // m
	double slope = 0.0;     // 1/m
	double neg_log_likelihood = 0.0;
	double deviance_vs_chance = 0.0;
};

inline constexpr double kGuessRate = 0.5;

double psychometric(double distance, double threshold, double slope);

/// Proportion correct per distance over real (non-training) trials, sorted by distance.
/// Distances without any trial do not appear.
std::vector<DistanceSummary> proportion_correct(std::span<const TrialRecord> records);

/// Maximum-likelihood fit. Needs at least three distances with data. Throws FitError when the data do
/// not support a rising psychometric function: no significant improvement over chance performance
/// (likelihood-ratio deviance below the 95% chi-square(2) point), a non-positive slope, or a threshold
/// outside the tested range.
PsychometricFit fit_psychometric(std::span<const DistanceSummary> data);

struct PsychometricSummary
{
	std::vector<DistanceSummary> per_distance;
	std::optional<PsychometricFit> fit;
	std::string fit_error;
	std::vector<std::string> warnings;
};

/// proportion_correct + fit_psychometric; fit failures are reported, not thrown.
/// `expected_distances` (when non-empty) lists configured distances so missing ones are warned about.
PsychometricSummary summarize(std::span<const TrialRecord> records, std::span<const double> expected_distances = {});

} // namespace tactile

#pragma once

#include <tactile/config.hpp>

#include <cstdint>
#include <optional>
#include <random>
#include <string_view>
#include <vector>

namespace tactile {

enum class TrialLabel { Training, Trial };
enum class Presentation { SinglePinFirst, TwoPinsFirst };

std::string_view to_string(TrialLabel label);
std::string_view to_string(Presentation presentation);

struct TrialPlan
{
	TrialLabel label = TrialLabel::Trial;
	int index = 1;        // 1-based within its label group
	int sequence = 1;     // 1-based across the whole session
	double distance = 0.0;
	Presentation presentation = Presentation::SinglePinFirst;

	friend bool operator==(const TrialPlan&, const TrialPlan&) = default;
};

/// Serves training trials, then real trials whose distances are drawn uniformly among
/// the distances that still have quota. Each distance is served exactly
/// number_presentations times as a real trial. Copyable value; same seed, same sequence.
class Scheduler
{
public:
	/// Throws SchedulerError("No poses for the stepper motor") when `distances` is empty,
	/// and SchedulerError for duplicate distances or invalid counts.
	static Scheduler build(const ExperimentParams& params, std::vector<double> distances, std::uint64_t seed);

	/// Next trial, or nullopt once the sequence is complete.
	std::optional<TrialPlan> next();

	bool done() const { return emitted_ >= total_trials(); }
	int total_trials() const;
	int emitted() const { return emitted_; }
	int training_trials() const { return params_.number_training_trials; }
	int real_trials() const { return params_.number_presentations * static_cast<int>(distances_.size()); }

	const std::vector<double>& distances() const { return distances_; }
	/// Remaining real-trial presentations per distance, aligned with distances().
	const std::vector<int>& remaining_quota() const { return quotas_; }
	int presentations_per_distance() const { return params_.number_presentations; }

	double max_distance() const;

	/// Replays `history` against this (fresh) scheduler, checking each served plan against it.
	/// Throws SchedulerError on divergence.
	void fast_forward(const std::vector<TrialPlan>& history);

private:
	Scheduler() = default;

	ExperimentParams params_;
	std::vector<double> distances_;
	std::vector<int> quotas_;
	int emitted_ = 0;
	std::mt19937_64 rng_;
};

} // namespace tactile

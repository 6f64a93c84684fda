#include <tactile/scheduler.hpp>

#include <tactile/error.hpp>
#include <tactile/records.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <set>

namespace tactile {

std::string_view to_string(TrialLabel label) { return label == TrialLabel::Training ? "Training" : "Trial"; }

std::string_view to_string(Presentation presentation)
{
	return presentation == Presentation::SinglePinFirst ? "SinglePinFirst" : "TwoPinsFirst";
}

Scheduler Scheduler::build(const ExperimentParams& params, std::vector<double> distances, std::uint64_t seed)
{
	if (distances.empty())
		throw SchedulerError("No poses for the stepper motor");
	if (std::set<double>(distances.begin(), distances.end()).size() != distances.size())
		throw SchedulerError("stepper distances must be pairwise distinct");
	if (params.number_presentations < 1)
		throw SchedulerError("number_presentations must be at least 1");
	if (params.number_training_trials < 0)
		throw SchedulerError("number_training_trials must not be negative");
	if (params.number_training_trials > 0 &&
		(params.training_index < 1 || params.training_index > params.number_training_trials))
		throw SchedulerError("training_index must lie in [1, number_training_trials]");

	Scheduler s;
	s.params_ = params;
	s.distances_ = std::move(distances);
	s.quotas_.assign(s.distances_.size(), params.number_presentations);
	s.rng_.seed(seed);
	return s;
}

int Scheduler::total_trials() const { return params_.number_training_trials + real_trials(); }

double Scheduler::max_distance() const { return *std::max_element(distances_.begin(), distances_.end()); }

std::optional<TrialPlan> Scheduler::next()
{
	if (done())
		return std::nullopt;

	TrialPlan plan;
	plan.sequence = emitted_ + 1;
	if (emitted_ < params_.number_training_trials) {
		plan.label = TrialLabel::Training;
		plan.index = emitted_ + 1;
		if (plan.index == params_.training_index) {
			plan.distance = max_distance();
		}
		else {
			std::uniform_int_distribution<size_t> pick(0, distances_.size() - 1);
			plan.distance = distances_[pick(rng_)];
		}
	}
	else {
		plan.label = TrialLabel::Trial;
		plan.index = emitted_ - params_.number_training_trials + 1;
		std::vector<size_t> open;
		for (size_t i = 0; i < quotas_.size(); ++i)
			if (quotas_[i] > 0)
				open.push_back(i);
		std::uniform_int_distribution<size_t> pick(0, open.size() - 1);
		const size_t chosen = open[pick(rng_)];
		--quotas_[chosen];
		plan.distance = distances_[chosen];
	}
	std::bernoulli_distribution coin(0.5);
	plan.presentation = coin(rng_) ? Presentation::TwoPinsFirst : Presentation::SinglePinFirst;
	++emitted_;
	return plan;
}

void Scheduler::fast_forward(const std::vector<TrialPlan>& history)
{
	for (const auto& expected : history) {
		const auto served = next();
		if (!served)
			throw SchedulerError(fmt::format("history has more trials than the schedule ({})", total_trials()));
		// Stored distances carry file precision only.
		const bool same_distance = round_to_decimals(served->distance, kValueDecimals) ==
			round_to_decimals(expected.distance, kValueDecimals);
		if (!same_distance || served->label != expected.label ||
			served->presentation != expected.presentation)
			throw SchedulerError(fmt::format("history diverges from the seeded schedule at trial {}", served->sequence));
	}
}

} // namespace tactile

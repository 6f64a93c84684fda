#include <tactile/analysis.hpp>

#include <tactile/error.hpp>

#include <fmt/format.h>
#include <gsl/gsl_multimin.h>

#include <algorithm>
#include <cmath>
#include <limits>
#include <map>
#include <memory>

namespace tactile {

namespace {

// 95% point of the chi-square distribution with 2 degrees of freedom.
constexpr double kChiSquare2At95 = 5.991464547107979;
constexpr double kNllTolerance = 1e-9;

double softplus(double z) { return z > 0.0 ? z + std::log1p(std::exp(-z)) : std::log1p(std::exp(z)); }

// 1 / (1 + exp(z)), stable for large |z|.
double logistic_complement(double z)
{
	if (z >= 0.0) {
		const double e = std::exp(-z);
		return e / (1.0 + e);
	}
	return 1.0 / (1.0 + std::exp(z));
}

struct Problem
{
	std::vector<double> u; // distances divided by `scale`
	std::vector<int> n;
	std::vector<int> k;
	double scale = 1.0;

	// x = (threshold / scale, log(slope * scale))
	double nll(double a, double log_b) const
	{
		const double b = std::exp(log_b);
		double total = 0.0;
		for (size_t i = 0; i < u.size(); ++i) {
			const double z = b * (u[i] - a);
			const double log_miss = std::log(0.5) - softplus(z);
			const double log_hit = std::log1p(-0.5 * logistic_complement(z));
			total -= k[i] * log_hit + (n[i] - k[i]) * log_miss;
		}
		return total;
	}
};

double gsl_nll(const gsl_vector* x, void* params)
{
	const auto* p = static_cast<const Problem*>(params);
	const double v = p->nll(gsl_vector_get(x, 0), gsl_vector_get(x, 1));
	return std::isfinite(v) ? v : std::numeric_limits<double>::max();
}

struct Minimum
{
	double a = 0.0;
	double log_b = 0.0;
	double nll = 0.0;
};

Minimum simplex(const Problem& problem, Minimum start, double step_a, double step_b)
{
	gsl_multimin_function f{ &gsl_nll, 2, const_cast<Problem*>(&problem) };
	std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> x(gsl_vector_alloc(2), &gsl_vector_free);
	std::unique_ptr<gsl_vector, decltype(&gsl_vector_free)> step(gsl_vector_alloc(2), &gsl_vector_free);
	gsl_vector_set(x.get(), 0, start.a);
	gsl_vector_set(x.get(), 1, start.log_b);
	gsl_vector_set(step.get(), 0, step_a);
	gsl_vector_set(step.get(), 1, step_b);

	std::unique_ptr<gsl_multimin_fminimizer, decltype(&gsl_multimin_fminimizer_free)> s(
		gsl_multimin_fminimizer_alloc(gsl_multimin_fminimizer_nmsimplex2, 2), &gsl_multimin_fminimizer_free);
	gsl_multimin_fminimizer_set(s.get(), &f, x.get(), step.get());

	for (int iter = 0; iter < 20000; ++iter) {
		if (gsl_multimin_fminimizer_iterate(s.get()) != GSL_SUCCESS)
			break;
		if (gsl_multimin_test_size(gsl_multimin_fminimizer_size(s.get()), 1e-10) == GSL_SUCCESS)
			break;
	}
	return { gsl_vector_get(s->x, 0), gsl_vector_get(s->x, 1), s->fval };
}

} // namespace

double psychometric(double distance, double threshold, double slope)
{
	return kGuessRate + (1.0 - kGuessRate) * (1.0 - logistic_complement(slope * (distance - threshold)));
}

std::vector<DistanceSummary> proportion_correct(std::span<const TrialRecord> records)
{
	std::map<double, DistanceSummary> by_distance;
	for (const auto& r : records) {
		if (r.label == TrialLabel::Training)
			continue;
		auto& s = by_distance[r.distance];
		s.distance = r.distance;
		++s.n;
		s.n_correct += r.correct ? 1 : 0;
	}
	std::vector<DistanceSummary> out;
	for (auto& [d, s] : by_distance) {
		s.proportion = static_cast<double>(s.n_correct) / static_cast<double>(s.n);
		out.push_back(s);
	}
	return out;
}

PsychometricFit fit_psychometric(std::span<const DistanceSummary> data)
{
	std::vector<DistanceSummary> points;
	for (const auto& d : data)
		if (d.n > 0)
			points.push_back(d);
	if (points.size() < 3)
		throw FitError(fmt::format("fit needs at least 3 distances with data, got {}", points.size()));

	Problem problem;
	double lo = points.front().distance, hi = lo;
	for (const auto& p : points) {
		lo = std::min(lo, p.distance);
		hi = std::max(hi, p.distance);
	}
	if (!(hi > 0.0) || hi == lo)
		throw FitError("fit needs distinct positive distances");
	problem.scale = hi;
	for (const auto& p : points) {
		problem.u.push_back(p.distance / hi);
		problem.n.push_back(p.n);
		problem.k.push_back(p.n_correct);
	}
	const double ulo = lo / hi;
	const double range = 1.0 - ulo;

	// Grid start, then simplex refinement restarted until the objective stops moving.
	Minimum best{ 0.0, 0.0, std::numeric_limits<double>::infinity() };
	for (int i = 0; i <= 40; ++i) {
		const double a = ulo + range * i / 40.0;
		for (int j = 0; j <= 30; ++j) {
			const double log_b = std::log(0.5) + (std::log(500.0 / range) - std::log(0.5)) * j / 30.0;
			const double v = problem.nll(a, log_b);
			if (v < best.nll)
				best = { a, log_b, v };
		}
	}
	for (int round = 0; round < 50; ++round) {
		const Minimum refined = simplex(problem, best, range / 20.0, 0.25);
		const bool settled = best.nll - refined.nll < kNllTolerance;
		if (refined.nll < best.nll)
			best = refined;
		if (settled)
			break;
	}

	PsychometricFit fit;
	fit.threshold = best.a * problem.scale;
	fit.slope = std::exp(best.log_b) / problem.scale;
	fit.neg_log_likelihood = best.nll;
	double chance = 0.0;
	for (size_t i = 0; i < problem.n.size(); ++i)
		chance -= problem.n[i] * std::log(0.5);
	fit.deviance_vs_chance = 2.0 * (chance - best.nll);

	if (!(fit.deviance_vs_chance >= kChiSquare2At95))
		throw FitError(fmt::format("fit-degenerate: performance does not rise above chance (deviance {:.3f} < {:.3f})",
			fit.deviance_vs_chance, kChiSquare2At95));
	if (!(fit.slope > 0.0) || !std::isfinite(fit.slope))
		throw FitError("fit-degenerate: slope is not positive");
	if (fit.threshold < lo || fit.threshold > hi)
		throw FitError(fmt::format("fit-degenerate: threshold {:.6f} m lies outside the tested range [{:.6f}, {:.6f}] m",
			fit.threshold, lo, hi));
	return fit;
}

PsychometricSummary summarize(std::span<const TrialRecord> records, std::span<const double> expected_distances)
{
	PsychometricSummary summary;
	summary.per_distance = proportion_correct(records);
	for (double d : expected_distances) {
		const bool present = std::any_of(summary.per_distance.begin(), summary.per_distance.end(),
			[d](const DistanceSummary& s) { return s.distance == d; });
		if (!present)
			summary.warnings.push_back(fmt::format("distance {:.6f} m has no trials; omitted", d));
	}
	try {
		summary.fit = fit_psychometric(summary.per_distance);
	}
	catch (const FitError& e) {
		summary.fit_error = e.what();
	}
	return summary;
}

} // namespace tactile

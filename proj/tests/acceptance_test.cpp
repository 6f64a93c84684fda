// Acceptance checks: one PASS/FAIL line per criterion, non-zero exit if any fails.

#include "test_support.hpp"

#include <tactile/analysis.hpp>
#include <tactile/persistence.hpp>
#include <tactile/scheduler.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <chrono>
#include <cmath>
#include <cstdio>
#include <fstream>
#include <map>

using namespace tactile;
using namespace tactile::test;

namespace {

struct Verdict
{
	bool pass = false;
	std::string detail;
};

Verdict pass(std::string detail) { return { true, std::move(detail) }; }
Verdict fail(std::string detail) { return { false, std::move(detail) }; }

const std::vector<double> kYoungDistances{ 0.0001, 0.0003, 0.0006, 0.001, 0.0013, 0.0016, 0.002 };

Responder coin_responder(std::uint64_t seed)
{
	auto rng = std::make_shared<std::mt19937_64>(seed);
	return [rng](const TrialPlan&) { return std::bernoulli_distribution(0.5)(*rng) ? Option::First : Option::Second; };
}

Verdict config_fidelity()
{
	const auto cfg = parse_demo_config(read_text_file(data_dir() / "demo_fragment.xml"));
	if (cfg.distances() != kYoungDistances)
		return fail("distances differ");
	if (cfg.touch.threshold != Threshold{ 0.5, 0.5, 0.25, 0.1, 0.1, 0.1 })
		return fail("thresholds differ");
	if (cfg.touch.event_time_wait != 0.10 || cfg.touch.movement_duration != 2.0 || cfg.touch.poking_duration != 5.0)
		return fail("durations differ");
	const auto& e = cfg.experiment;
	if (e.number_training_trials != 1 || e.training_index != 1 || e.number_presentations != 10 ||
		e.number_ftdata_recordings != 10)
		return fail("experiment parameters differ");
	if (young_config() != cfg)
		return fail("shipped young config differs from the fragment");
	return pass("7 distances, thresholds, durations and experiment parameters exact");
}

Verdict trial_counts()
{
	const auto y = young_config();
	const auto e = elderly_config();
	auto count = [](const DemoConfig& c) {
		auto s = Scheduler::build(c.experiment, c.distances(), 1);
		int n = 0;
		while (s.next())
			++n;
		return n;
	};
	const int ny = count(y), ne = count(e);
	const auto detail = fmt::format("young {}, elderly {}", ny, ne);
	return ny == 71 && ne == 101 ? pass(detail) : fail(detail);
}

/// Runs one session in memory, answering every pause with yes and every response with a coin flip.
std::vector<TrialRecord> run_in_memory(const DemoConfig& cfg, std::uint64_t seed)
{
	Session s(cfg, FingerModel{}, seed);
	const auto respond = coin_responder(seed);
	s.submit(Confirm{ false });
	for (const char* text : { "B01", "Bal", "Ance", "40" })
		s.submit(TextInput{ text });
	s.submit(SelectOption{ Option::Female });
	s.submit(TextInput{ "" });
	s.submit(Confirm{ true });
	while (!is_terminal(s.phase())) {
		if (s.phase() == Phase::AwaitStepperMove)
			s.submit(Confirm{ true });
		else
			s.submit(SelectOption{ respond(*s.state().current) });
	}
	return s.state().records;
}

Verdict balance()
{
	const auto cfg = young_config();
	for (std::uint64_t seed = 0; seed < 100; ++seed) {
		const auto records = run_in_memory(cfg, seed);
		if (records.size() != 71)
			return fail(fmt::format("seed {}: {} trials", seed, records.size()));
		std::map<double, int> served;
		for (const auto& r : records)
			if (r.label == TrialLabel::Trial)
				++served[r.distance];
		for (double d : cfg.distances())
			if (served[d] != cfg.experiment.number_presentations)
				return fail(fmt::format("seed {}: distance {} served {} times", seed, d, served[d]));
		if (served.size() != cfg.distances().size())
			return fail(fmt::format("seed {}: unexpected distance served", seed));
	}
	return pass("100 full sessions, every distance exactly 10 real trials");
}

Verdict training_rule()
{
	const auto cfg = young_config();
	const auto distances = cfg.distances();
	const auto max = *std::max_element(distances.begin(), distances.end());
	int ok = 0;
	for (std::uint64_t seed = 0; seed < 100; ++seed) {
		auto s = Scheduler::build(cfg.experiment, cfg.distances(), seed);
		for (int i = 1; i <= cfg.experiment.training_index; ++i) {
			const auto plan = s.next();
			if (i == cfg.experiment.training_index && plan && plan->label == TrialLabel::Training && plan->distance == max)
				++ok;
		}
	}
	const auto detail = fmt::format("{}/100 seeds", ok);
	return ok == 100 ? pass(detail) : fail(detail);
}

Verdict stepper_fidelity()
{
	const std::string expected = "[DEMO]: move stepper motor to 1.0 [mm] 363.00 [step]";
	const auto got = stepper_prompt(0.001);
	return got == expected ? pass("byte-exact") : fail(fmt::format("got \"{}\"", got));
}

Verdict offset()
{
	const auto cfg = young_config();
	const RigState rig = move_global(bring_up(), cfg.touch.init, cfg.touch.movement_duration);
	double worst = 0.0;
	NoiseSource rng(1);
	for (const auto& source : { young_config(), elderly_config() })
		for (double d : source.distances()) {
			const double expected = -0.018 - 0.5 * d;
			worst = std::max(worst, std::abs(presentation_motion(cfg.touch, Side::TwoPins, d).v2 - expected));
			const auto res = run_presentation(rig, cfg.touch, cfg.experiment, Side::TwoPins, d, FingerModel{}, rng);
			worst = std::max(worst, std::abs(res.lateral_target.v2 - (cfg.touch.init.v2 + expected)));
		}
	const auto detail = fmt::format("max deviation {:.3g} m", worst);
	return worst <= 1e-12 ? pass(detail) : fail(detail);
}

bool spacing_ok(const FtRecording& rec, double wait, double& worst)
{
	for (size_t i = 1; i < rec.samples.size(); ++i)
		worst = std::max(worst, std::abs(rec.samples[i].timestamp - rec.samples[i - 1].timestamp - wait));
	return worst <= 0.01 + 1e-9;
}

Verdict contact_semantics()
{
	const auto cfg = young_config();
	const auto root = scratch_dir("acc_contact");
	const double wait = cfg.touch.event_time_wait;
	double worst = 0.0;
	int recordings = 0;

	SessionRunner present(cfg, options_for(5, root / "present"));
	drive(present, false, always_first());
	for (const auto& r : present.session().state().records)
		for (const auto* rec : { &r.ft_first, &r.ft_second }) {
			++recordings;
			if (!rec->touched || rec->samples.size() != 10)
				return fail(fmt::format("default finger: trial {} touched={} samples={}", r.trial_no, rec->touched,
					rec->samples.size()));
			for (const auto& s : rec->samples)
				if (!s.touched)
					return fail(fmt::format("default finger: untouched sample in trial {}", r.trial_no));
			if (!spacing_ok(*rec, wait, worst))
				return fail(fmt::format("default finger: spacing off by {:.3g} s", worst));
		}

	auto options = options_for(5, root / "absent");
	options.finger = FingerModel::absent();
	SessionRunner absent(cfg, options);
	drive(absent, false, always_first());
	for (const auto& r : absent.session().state().records)
		for (const auto* rec : { &r.ft_first, &r.ft_second })
			if (rec->touched || rec->samples.size() != 10)
				return fail(fmt::format("absent finger: trial {} touched={}", r.trial_no, rec->touched));

	const RigState rig = move_global(bring_up(), cfg.touch.init, cfg.touch.movement_duration);
	NoiseSource rng(5);
	const auto poke = execute_poke(rig, cfg.touch.poking, cfg.touch.poking_duration, cfg.touch.threshold,
		FingerModel::absent(), PokeParams{ wait, cfg.experiment.number_ftdata_recordings }, rng);
	const double travel = rig.effector_pose.v3 - poke.result.stop_pose.v3;
	if (poke.result.stopped_on_contact || std::abs(travel - 0.02) > 1e-12)
		return fail(fmt::format("absent finger travel {} m", travel));

	return pass(fmt::format("{} recordings touched with 10 samples, spacing within {:.3g} s; absent finger untouched, "
							"travel {:.4f} m",
		recordings, worst, travel));
}

bool same_files(const fs::path& a, const fs::path& b, const std::vector<std::string>& names, std::string& which)
{
	for (const auto& n : names)
		if (read_text_file(a / n) != read_text_file(b / n)) {
			which = n;
			return false;
		}
	return true;
}

std::vector<std::string> archive_files(const ArchivePaths& p)
{
	return { p.data_xml.filename().string(), p.participant_csv.filename().string(), p.trial_csv.filename().string(),
		p.tmp_csv.filename().string() };
}

Verdict persistence_round_trip()
{
	std::mt19937_64 rng(2024);
	for (int i = 0; i < 50; ++i) {
		const auto root = scratch_dir("acc_roundtrip");
		std::uniform_int_distribution<int> small(1, 4);
		std::vector<double> distances;
		for (int k = small(rng); k > 0; --k)
			distances.push_back(0.0004 * k);
		const auto cfg = small_config(distances, small(rng), small(rng) - 1, small(rng));
		const std::uint64_t seed = rng();
		Intake intake;
		intake.id = fmt::format("R{:02}", i);
		intake.notes = i % 2 ? "left-handed, \"quiet\"" : "";
		SessionRunner runner(cfg, options_for(seed, root));
		drive(runner, i % 2 == 0, coin_responder(seed), intake);
		const auto& archive = *runner.archive();
		if (read_archive(archive.paths.dir) != archive)
			return fail(fmt::format("session {} differs after reading back", i));
	}

	const auto root = scratch_dir("acc_golden");
	const auto golden = data_dir() / "golden";
	const auto archive = run_scripted(golden / "config.xml", golden / "script.jsonl", 7, options_for(7, root));
	std::string which;
	if (!same_files(archive.paths.dir, golden / "expected", archive_files(archive.paths), which))
		return fail("golden fixture differs in " + which);
	return pass("50 sessions read back equal; golden fixture byte-identical");
}

Verdict replay_determinism()
{
	const auto cfg = young_config();
	for (std::uint64_t seed = 100; seed < 120; ++seed) {
		const auto root = scratch_dir("acc_replay");
		SessionRunner runner(cfg, options_for(seed, root / "live"));
		drive(runner, seed % 2 == 0, coin_responder(seed), {}, seed % 5 == 0 ? 12 : -1);
		const auto& original = *runner.archive();
		const auto again = replay(original.paths.manifest, root / "replayed");
		std::string which;
		if (!same_files(original.paths.dir, again.paths.dir, archive_files(original.paths), which))
			return fail(fmt::format("seed {}: {} differs", seed, which));
	}
	return pass("20 seeds byte-identical");
}

Verdict end_to_end()
{
	const auto cfg = young_config();
	const auto root = scratch_dir("acc_e2e");
	SessionRunner probe(cfg, options_for(31, root / "probe"));
	const auto commands = drive(probe, false, coin_responder(31));
	const auto script = root / "session.jsonl";
	{
		std::ofstream out(script);
		for (const auto& c : commands)
			out << encode(c);
	}

	const auto start = std::chrono::steady_clock::now();
	const auto archive = run_scripted(young_config_path(), script, 31, options_for(31, root / "run"));
	const double wall = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();

	if (archive.trials.size() != 71)
		return fail(fmt::format("{} trials", archive.trials.size()));
	const auto dir = archive.paths.dir;
	for (const char* name : { "data.xml", "data-P01-Lovelace.csv", "data-P01-trial.csv" })
		if (!fs::exists(dir / name))
			return fail(fmt::format("missing {}", name));
	const auto detail = fmt::format("71 trials in {:.3f} s wall, data.xml + both CSVs present", wall);
	return wall < 2.0 ? pass(detail) : fail(detail);
}

std::vector<DistanceSummary> synthetic(double threshold, double slope, std::uint64_t seed, bool coin)
{
	std::mt19937_64 rng(seed);
	std::uniform_real_distribution<double> u(0.0, 1.0);
	std::vector<DistanceSummary> out;
	for (double d : kYoungDistances) {
		const double p = coin ? 0.5 : 0.5 + 0.5 / (1.0 + std::exp(-slope * (d - threshold)));
		int k = 0;
		for (int i = 0; i < 200; ++i)
			k += u(rng) < p;
		out.push_back({ d, 200, k, k / 200.0 });
	}
	return out;
}

Verdict analysis_oracle()
{
	const double threshold = 0.0011;
	double worst = 0.0;
	for (std::uint64_t seed = 1; seed <= 20; ++seed) {
		const auto fit = fit_psychometric(synthetic(threshold, 4000.0, seed, false));
		worst = std::max(worst, std::abs(fit.threshold - threshold) / threshold);
	}
	if (worst > 0.10)
		return fail(fmt::format("threshold off by {:.1f}%", 100 * worst));
	try {
		const auto fit = fit_psychometric(synthetic(threshold, 4000.0, 1, true));
		return fail(fmt::format("coin-flip observer fitted, threshold {}", fit.threshold));
	}
	catch (const FitError&) {
	}
	return pass(fmt::format("20 synthetic observers within {:.1f}% of 1.1 mm; coin-flip observer refused", 100 * worst));
}

} // namespace

int main()
{
	struct Check
	{
		const char* name;
		Verdict (*run)();
		double budget; // wall seconds, 0 = none
	};
	const std::vector<Check> checks{
		{ "config fidelity", config_fidelity, 1.0 },
		{ "trial count", trial_counts, 1.0 },
		{ "balance", balance, 10.0 },
		{ "training rule", training_rule, 0.0 },
		{ "stepper fidelity", stepper_fidelity, 0.0 },
		{ "two-pin offset", offset, 0.0 },
		{ "contact semantics", contact_semantics, 0.0 },
		{ "persistence round-trip", persistence_round_trip, 0.0 },
		{ "replay determinism", replay_determinism, 0.0 },
		{ "end-to-end", end_to_end, 0.0 },
		{ "analysis oracle", analysis_oracle, 0.0 },
	};
	int failures = 0;
	for (const auto& [name, check, budget] : checks) {
		const auto start = std::chrono::steady_clock::now();
		Verdict v;
		try {
			v = check();
		}
		catch (const std::exception& e) {
			v = fail(std::string("exception: ") + e.what());
		}
		const double secs = std::chrono::duration<double>(std::chrono::steady_clock::now() - start).count();
		if (v.pass && budget > 0.0 && secs >= budget)
			v = fail(fmt::format("{}; over the {:.0f} s budget", v.detail, budget));
		std::printf("%s %s: %s (%.2f s)\n", v.pass ? "PASS" : "FAIL", name, v.detail.c_str(), secs);
		failures += !v.pass;
	}
	std::fflush(stdout);
	return failures == 0 ? 0 : 1;
}

// tactile_rig: run, replay and analyse simulated two-point discrimination sessions.

#include <tactile/analysis.hpp>
#include <tactile/gateway.hpp>
#include <tactile/runner.hpp>
#include <tactile/ws_server.hpp>

#include <CLI11.hpp>
#include <fmt/format.h>

#include <algorithm>
#include <cctype>
#include <iostream>
#include <random>

namespace fs = std::filesystem;
using namespace tactile;

namespace {

template <class... Ts>
struct overloaded : Ts...
{
	using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string lower(std::string s)
{
	std::transform(s.begin(), s.end(), s.begin(), [](unsigned char c) { return std::tolower(c); });
	return s;
}

void print_events(const std::vector<SessionEvent>& events)
{
	for (const auto& event : events)
		std::visit(overloaded{
			[](const PhaseChanged& e) { fmt::print("{}\n", e.prompt); },
			[](const ConsoleLine& e) { fmt::print("{}\n", e.text); },
			[](const FtReading&) {}, // recorded samples also arrive as console lines
			[](const TrialCompleted&) {},
			[](const SessionEnded& e) { fmt::print("[DEMO]: session ended ({})\n", e.reason); } }, event);
	std::fflush(stdout);
}

// Maps a console line onto the event the current phase expects.
std::optional<OperatorEvent> console_event(const Session& session, const std::string& line)
{
	const std::string key = lower(line);
	if (key == "esc" || key == "escape")
		return Escape{};
	const auto& st = session.state();
	switch (st.phase) {
	case Phase::AwaitDebugChoice:
	case Phase::AwaitInitConfirm:
	case Phase::AwaitStepperMove:
		if (key == "y" || key == "yes")
			return Confirm{ true };
		if (key == "n" || key == "no")
			return Confirm{ false };
		return std::nullopt;
	case Phase::AwaitResponse:
		if (key == "first" || key == "1")
			return SelectOption{ Option::First };
		if (key == "second" || key == "2")
			return SelectOption{ Option::Second };
		return std::nullopt;
	case Phase::Intake:
		if (st.intake_field == IntakeField::Gender) {
			if (key.empty() || key == "female" || key == "f")
				return SelectOption{ Option::Female };
			if (key == "male" || key == "m")
				return SelectOption{ Option::Male };
			return std::nullopt;
		}
		return TextInput{ line };
	default:
		return std::nullopt;
	}
}

void report_archive(const SessionRunner& runner)
{
	if (const auto& archive = runner.archive())
		fmt::print(stderr, "archive written to {}\n", archive->paths.dir.string());
	else if (runner.paths())
		fmt::print(stderr, "session data in {}\n", runner.paths()->dir.string());
}

int run_interactive(SessionRunner& runner)
{
	print_events(runner.session().initial_events());
	std::string line;
	int n = 0;
	while (!runner.finished() && std::getline(std::cin, line)) {
		if (!line.empty() && line.back() == '\r')
			line.pop_back();
		const auto event = console_event(runner.session(), line);
		if (!event) {
			fmt::print("? {}\n", runner.session().prompt());
			continue;
		}
		const auto outcome = runner.apply(to_wire_command(*event, fmt::format("console-{}", ++n)));
		if (!outcome.accepted)
			fmt::print("! {}\n", outcome.error);
		print_events(outcome.events);
	}
	report_archive(runner);
	return runner.finished() ? 0 : 1;
}

struct RunArgs
{
	std::string config;
	std::optional<std::uint64_t> seed;
	bool debug = false;
	std::string serve;
	bool realtime = false;
	std::string script;
	std::string data;
};

int cmd_run(const RunArgs& args)
{
	const std::string xml = read_text_file(args.config);
	std::vector<std::string> warnings;
	const DemoConfig config = parse_demo_config(xml, &warnings);
	for (const auto& w : warnings)
		fmt::print(stderr, "warning: {}\n", w);

	RunOptions options;
	options.seed = args.seed ? *args.seed : (std::uint64_t{ std::random_device{}() } << 32) ^ std::random_device{}();
	options.data_root = args.data;
	options.config_path = args.config;
	options.config_xml = xml;
	options.realtime = args.realtime;
	fmt::print(stderr, "seed: {}\n", options.seed);

	if (!args.script.empty()) {
		auto commands = read_script(args.script);
		if (args.debug)
			commands.insert(commands.begin(), to_wire_command(Confirm{ true }, "cli-debug"));
		const auto archive = run_commands(config, commands, std::move(options));
		if (!archive.paths.dir.empty())
			fmt::print(stderr, "archive written to {}\n", archive.paths.dir.string());
		return 0;
	}

	SessionRunner runner(config, std::move(options));
	if (args.debug) {
		const auto outcome = runner.apply(to_wire_command(Confirm{ true }, "cli-debug"));
		if (args.serve.empty())
			print_events(outcome.events);
	}

	if (args.serve.empty())
		return run_interactive(runner);

	Gateway gateway(runner);
	WsServer server(gateway, args.serve);
	server.start();
	fmt::print(stderr, "operator service listening on port {}\n", server.port());
	server.wait_until_finished();
	server.stop();
	report_archive(runner);
	return 0;
}

int cmd_replay(const std::string& manifest, std::string out)
{
	const fs::path manifest_path(manifest);
	if (out.empty())
		out = (fs::temp_directory_path() / fmt::format("tactile_replay_{}", std::random_device{}())).string();
	const auto archive = replay(manifest_path, out);
	const auto original = read_manifest(manifest_path);
	if (!original.participant) {
		fmt::print("replayed; the original session ended before intake, nothing to compare\n");
		return 0;
	}
	const auto orig = ArchivePaths::in_dir(manifest_path.parent_path(), *original.participant,
		parse_demo_config(original.config_xml).experiment);
	const auto copy = ArchivePaths::in_dir(archive.paths.dir.empty() ? fs::path(out) : archive.paths.dir,
		*original.participant, parse_demo_config(original.config_xml).experiment);

	int mismatches = 0;
	const std::pair<fs::path, fs::path> pairs[] = { { orig.data_xml, copy.data_xml },
		{ orig.participant_csv, copy.participant_csv }, { orig.trial_csv, copy.trial_csv },
		{ orig.tmp_csv, copy.tmp_csv } };
	for (const auto& [a, b] : pairs) {
		if (!fs::exists(a))
			continue;
		const bool same = fs::exists(b) && read_text_file(a) == read_text_file(b);
		fmt::print("{} {}\n", same ? "identical" : "DIFFERS  ", a.filename().string());
		mismatches += same ? 0 : 1;
	}
	fmt::print("replay written to {}\n", copy.dir.string());
	return mismatches == 0 ? 0 : 1;
}

int cmd_analyze(const std::string& dir, bool as_json)
{
	const auto archive = read_archive(dir);
	std::vector<double> expected;
	const fs::path manifest_path = fs::path(dir) / "manifest.json";
	if (fs::exists(manifest_path)) {
		const auto m = read_manifest(manifest_path);
		if (!m.config_xml.empty())
			expected = parse_demo_config(m.config_xml).distances();
	}
	const auto summary = summarize(archive.trials, expected);

	if (as_json) {
		nlohmann::json j;
		j["per_distance"] = nlohmann::json::array();
		for (const auto& d : summary.per_distance)
			j["per_distance"].push_back(
				{ { "distance_m", d.distance }, { "n", d.n }, { "n_correct", d.n_correct }, { "proportion", d.proportion } });
		if (summary.fit)
			j["fit"] = { { "threshold_m", summary.fit->threshold }, { "slope_per_m", summary.fit->slope },
				{ "neg_log_likelihood", summary.fit->neg_log_likelihood },
				{ "deviance_vs_chance", summary.fit->deviance_vs_chance } };
		else
			j["fit"] = nullptr;
		j["fit_error"] = summary.fit_error;
		j["warnings"] = summary.warnings;
		fmt::print("{}\n", j.dump(2));
		return 0;
	}

	fmt::print("{:>14} {:>5} {:>9} {:>11}\n", "distance [mm]", "n", "correct", "proportion");
	for (const auto& d : summary.per_distance)
		fmt::print("{:>14.2f} {:>5} {:>9} {:>11.3f}\n", d.distance * 1000.0, d.n, d.n_correct, d.proportion);
	if (summary.fit)
		fmt::print("threshold {:.3f} [mm], slope {:.1f} [1/mm], deviance vs chance {:.2f}\n",
			summary.fit->threshold * 1000.0, summary.fit->slope / 1000.0, summary.fit->deviance_vs_chance);
	else
		fmt::print("no fit: {}\n", summary.fit_error);
	for (const auto& w : summary.warnings)
		fmt::print("warning: {}\n", w);
	return 0;
}

int cmd_validate(const std::string& path)
{
	std::vector<std::string> warnings;
	const DemoConfig config = load_demo_config(path, &warnings);
	for (const auto& w : warnings)
		fmt::print("warning: {}\n", w);
	const auto findings = validate_config(config);
	for (const auto& f : findings)
		fmt::print("{}: {}\n", f.locator, f.message);
	if (findings.empty())
		fmt::print("ok: {} distances, {} trials\n", config.distances().size(),
			config.experiment.number_training_trials
				+ static_cast<int>(config.distances().size()) * config.experiment.number_presentations);
	return findings.empty() ? 0 : 1;
}

} // namespace

int main(int argc, char** argv)
{
	CLI::App app{ "Simulated two-point tactile discrimination rig" };
	app.require_subcommand(1);

	RunArgs run;
	auto* run_cmd = app.add_subcommand("run", "Run a session (console, script or WebSocket operator)");
	run_cmd->add_option("--config", run.config, "Demo config XML")->required()->check(CLI::ExistingFile);
	run_cmd->add_option("--seed", run.seed, "RNG seed (random when omitted; always logged)");
	run_cmd->add_flag("--debug", run.debug, "Answer the debug-mode question with Y");
	run_cmd->add_option("--serve", run.serve, "Serve the operator protocol on host:port");
	run_cmd->add_flag("--realtime", run.realtime, "Pace the session at simulated speed");
	run_cmd->add_option("--script", run.script, "JSON-lines command script")->check(CLI::ExistingFile);
	run_cmd->add_option("--data", run.data, "Data root (default: TACTILE_RIG_DATA or the config's path)");
	run_cmd->get_option("--serve")->excludes("--script");

	std::string manifest, replay_out;
	auto* replay_cmd = app.add_subcommand("replay", "Re-run a session from its manifest and compare the files");
	replay_cmd->add_option("manifest", manifest, "manifest.json of the session")->required()->check(CLI::ExistingFile);
	replay_cmd->add_option("--out", replay_out, "Data root for the replayed session");

	std::string analyze_dir;
	bool analyze_json = false;
	auto* analyze_cmd = app.add_subcommand("analyze", "Proportion correct and psychometric fit");
	analyze_cmd->add_option("dir", analyze_dir, "Session directory")->required()->check(CLI::ExistingDirectory);
	analyze_cmd->add_flag("--json", analyze_json, "JSON output");
	analyze_cmd->add_flag("--table", "Table output (default)");

	std::string validate_path;
	auto* validate_cmd = app.add_subcommand("validate-config", "Check a demo config");
	validate_cmd->add_option("config", validate_path)->required()->check(CLI::ExistingFile);

	CLI11_PARSE(app, argc, argv);

	try {
		if (*run_cmd)
			return cmd_run(run);
		if (*replay_cmd)
			return cmd_replay(manifest, replay_out);
		if (*analyze_cmd)
			return cmd_analyze(analyze_dir, analyze_json);
		if (*validate_cmd)
			return cmd_validate(validate_path);
	}
	catch (const std::exception& e) {
		fmt::print(stderr, "error: {}\n", e.what());
		return 2;
	}
	return 0;
}

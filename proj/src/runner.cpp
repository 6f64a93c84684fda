#include <tactile/runner.hpp>

#include <tactile/error.hpp>

#include <fmt/format.h>

#include <chrono>
#include <cstdlib>
#include <fstream>
#include <thread>

namespace tactile {

namespace {

struct ScriptStep
{
	int line = 0;
	WireCommand command;
};

std::vector<ScriptStep> read_steps(const std::filesystem::path& path)
{
	std::ifstream in(path);
	if (!in)
		throw ScriptError(fmt::format("cannot open script '{}'", path.string()));
	std::vector<ScriptStep> steps;
	std::string line;
	for (int no = 1; std::getline(in, line); ++no) {
		const auto first = line.find_first_not_of(" \t\r");
		if (first == std::string::npos || line[first] == '#')
			continue;
		try {
			steps.push_back({ no, decode_command(line) });
		}
		catch (const WireError& e) {
			throw ScriptError(fmt::format("{}:{}: {}", path.string(), no, e.what()));
		}
	}
	return steps;
}

SessionArchive run_steps(const DemoConfig& config, const std::vector<ScriptStep>& steps, RunOptions options,
	std::string_view origin)
{
	SessionRunner runner(config, std::move(options));
	for (const auto& step : steps) {
		const Phase phase = runner.session().phase();
		const auto outcome = runner.apply(step.command);
		if (!outcome.accepted)
			throw ScriptError(fmt::format("{} line {}: '{}' rejected in phase {}: {}", origin, step.line,
				to_string(step.command.kind), to_string(phase), outcome.error));
	}
	if (!runner.finished())
		throw ScriptError(fmt::format("{} ended while the session waits in phase {} (\"{}\")", origin,
			to_string(runner.session().phase()), runner.session().prompt()));
	return runner.archive() ? *runner.archive() : SessionArchive{};
}

} // namespace

std::filesystem::path resolve_data_root(const DemoConfig& config, const std::filesystem::path& explicit_root)
{
	if (!explicit_root.empty())
		return explicit_root;
	if (const char* env = std::getenv("TACTILE_RIG_DATA"); env && *env)
		return env;
	return config.experiment.data_path;
}

SessionRunner::SessionRunner(DemoConfig config, RunOptions options)
	: options_(std::move(options))
	, data_root_(resolve_data_root(config, options_.data_root))
	, session_(config, options_.finger, options_.seed, [this](const TrialRecord& r) { on_trial(r); })
{
	manifest_.seed = options_.seed;
	manifest_.finger = options_.finger;
	manifest_.config_path = options_.config_path;
	manifest_.config_xml = options_.config_xml;
	if (manifest_.config_xml.empty()) {
		try {
			manifest_.config_xml = serialize_demo_config(config);
		}
		catch (const ConfigError&) {
			// Not serializable (e.g. no stepper poses); the session will cancel before any trial.
		}
	}
}

SessionRunner::Outcome SessionRunner::apply(const WireCommand& command)
{
	Outcome outcome;
	OperatorEvent event;
	try {
		event = to_operator_event(command);
	}
	catch (const WireError& e) {
		outcome.error = e.what();
		outcome.error_code = "wire";
		return outcome;
	}

	const double before = session_.state().rig.sim_time();
	try {
		outcome.events = session_.submit(event);
	}
	catch (const PhaseError& e) {
		outcome.error = e.what();
		outcome.error_code = "phase";
		return outcome;
	}
	catch (const InputError& e) {
		outcome.error = e.what();
		outcome.error_code = "input";
		return outcome;
	}
	outcome.accepted = true;
	manifest_.commands.push_back(to_json(command));
	manifest_.debug_mode = session_.state().debug_mode;
	after_transition(outcome.events);

	if (options_.realtime) {
		const double elapsed = session_.state().rig.sim_time() - before;
		if (elapsed > 0.0)
			std::this_thread::sleep_for(std::chrono::duration<double>(elapsed));
	}
	return outcome;
}

void SessionRunner::on_trial(const TrialRecord& record)
{
	if (!paths_)
		throw Error("trial completed before the participant directory was allocated");
	append_trial_tmp(paths_->tmp_csv, record);

	const int training = session_.state().config.experiment.number_training_trials;
	ManifestTrial entry;
	entry.no = record.trial_no;
	entry.label = record.label;
	entry.index = record.label == TrialLabel::Training ? record.trial_no : record.trial_no - training;
	entry.touched_first = record.ft_first.touched;
	entry.touched_second = record.ft_second.touched;
	manifest_.trials.push_back(entry);
}

void SessionRunner::refresh_quotas()
{
	manifest_.quotas.clear();
	if (const auto& sched = session_.state().scheduler)
		for (size_t i = 0; i < sched->distances().size(); ++i)
			manifest_.quotas.push_back({ sched->distances()[i], sched->remaining_quota()[i] });
}

void SessionRunner::after_transition(const std::vector<SessionEvent>& events)
{
	const auto& st = session_.state();
	// The manifest is rewritten only at durable points: directory allocation, trial end, session end.
	bool durable = false;
	if (!paths_ && st.participant_complete) {
		const auto dir = allocate_session_dir(data_root_, st.participant.id);
		std::filesystem::create_directories(dir);
		paths_ = ArchivePaths::in_dir(dir, st.participant, st.config.experiment);
		manifest_.participant = st.participant;
		durable = true;
	}
	refresh_quotas();

	for (const auto& e : events) {
		durable = durable || std::holds_alternative<TrialCompleted>(e);
		const auto* end = std::get_if<SessionEnded>(&e);
		if (!end)
			continue;
		durable = true;
		manifest_.status = end->completed ? "complete" : "cancelled";
		manifest_.reason = end->reason;
		if (paths_) {
			SessionArchive archive;
			archive.data_name = st.config.data_name;
			archive.participant = st.participant;
			archive.trials = st.records;
			archive.paths = *paths_;
			archive.paths = write_archive(archive, st.config.experiment);
			archive_ = std::move(archive);
		}
	}
	if (paths_ && durable)
		write_manifest(paths_->manifest, manifest_);
}

std::vector<WireCommand> read_script(const std::filesystem::path& path)
{
	std::vector<WireCommand> commands;
	for (auto& step : read_steps(path))
		commands.push_back(std::move(step.command));
	return commands;
}

SessionArchive run_scripted(const std::filesystem::path& config_path, const std::filesystem::path& script_path,
	std::uint64_t seed, RunOptions options)
{
	const std::string xml = read_text_file(config_path);
	const DemoConfig config = parse_demo_config(xml);
	options.seed = seed;
	options.config_path = config_path.string();
	options.config_xml = xml;
	return run_steps(config, read_steps(script_path), std::move(options), script_path.string());
}

SessionArchive run_commands(const DemoConfig& config, const std::vector<WireCommand>& commands, RunOptions options)
{
	std::vector<ScriptStep> steps;
	for (size_t i = 0; i < commands.size(); ++i)
		steps.push_back({ static_cast<int>(i + 1), commands[i] });
	return run_steps(config, steps, std::move(options), "command log");
}

SessionArchive replay(const std::filesystem::path& manifest_path, const std::filesystem::path& data_root)
{
	const SessionManifest m = read_manifest(manifest_path);
	if (m.config_xml.empty())
		throw ScriptError(fmt::format("{}: manifest carries no config", manifest_path.string()));
	RunOptions options;
	options.seed = m.seed;
	options.finger = m.finger;
	options.data_root = data_root;
	options.config_path = m.config_path;
	options.config_xml = m.config_xml;

	std::vector<WireCommand> commands;
	for (const auto& c : m.commands)
		commands.push_back(command_from_json(c));
	return run_commands(parse_demo_config(m.config_xml), commands, std::move(options));
}

} // namespace tactile

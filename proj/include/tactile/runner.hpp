#pragma once

#include <tactile/manifest.hpp>
#include <tactile/persistence.hpp>
#include <tactile/session.hpp>
#include <tactile/wire.hpp>

#include <cstdint>
#include <filesystem>
#include <functional>
#include <optional>
#include <string>
#include <vector>

namespace tactile {

/// Command rejected while replaying a script or command log.
class ScriptError : public Error
{
public:
	using Error::Error;
};

struct RunOptions
{
	std::uint64_t seed = 0;
	FingerModel finger;
	/// Replaces the config's data path when non-empty.
	std::filesystem::path data_root;
	/// Recorded in the manifest so the session can be replayed without the original file.
	std::string config_path;
	std::string config_xml;
	/// Sleep for the simulated duration of every transition.
	bool realtime = false;
};

/// Data root honouring TACTILE_RIG_DATA, falling back to the config's path.
std::filesystem::path resolve_data_root(const DemoConfig& config, const std::filesystem::path& explicit_root = {});

/// Session plus its on-disk side: allocates the participant directory once intake is done,
/// appends every trial to tmp.csv, keeps manifest.json current and writes the archive
/// when the session ends. Accepted commands are logged for replay.
class SessionRunner
{
public:
	SessionRunner(DemoConfig config, RunOptions options);
	SessionRunner(const SessionRunner&) = delete;
	SessionRunner& operator=(const SessionRunner&) = delete;

	struct Outcome
	{
		bool accepted = false;
		std::vector<SessionEvent> events;
		std::string error; // why the command was rejected
		std::string error_code; // "phase" | "input" | "wire"
	};

	/// Applies a command; rejection is reported in the outcome, never thrown.
	/// I/O failures propagate.
	Outcome apply(const WireCommand& command);

	const Session& session() const { return session_; }
	const DemoConfig& config() const { return session_.state().config; }
	const SessionManifest& manifest() const { return manifest_; }
	const std::optional<ArchivePaths>& paths() const { return paths_; }
	/// Set once the archive has been written.
	const std::optional<SessionArchive>& archive() const { return archive_; }
	bool finished() const { return is_terminal(session_.phase()); }

private:
	void on_trial(const TrialRecord& record);
	void after_transition(const std::vector<SessionEvent>& events);
	void refresh_quotas();

	RunOptions options_;
	std::filesystem::path data_root_;
	Session session_;
	SessionManifest manifest_;
	std::optional<ArchivePaths> paths_;
	std::optional<SessionArchive> archive_;
};

/// Reads a JSON-lines command script (blank lines and '#' comments skipped).
std::vector<WireCommand> read_script(const std::filesystem::path& path);

/// Runs a whole session from a script without any network and returns the written archive.
/// Throws ScriptError naming the script line and phase if a command is rejected or the script
/// ends before the session does.
SessionArchive run_scripted(const std::filesystem::path& config_path, const std::filesystem::path& script_path,
	std::uint64_t seed, RunOptions options = {});

/// Same, with the commands already in memory.
SessionArchive run_commands(const DemoConfig& config, const std::vector<WireCommand>& commands, RunOptions options);

/// Re-executes the command log of `manifest_path` against a fresh session with the recorded seed,
/// config and finger model, writing under `data_root`.
SessionArchive replay(const std::filesystem::path& manifest_path, const std::filesystem::path& data_root);

} // namespace tactile

#pragma once

#include <tactile/config.hpp>
#include <tactile/manifest.hpp>
#include <tactile/records.hpp>

#include <filesystem>
#include <span>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

namespace fs = std::filesystem;

/// File layout of one participant's session directory:
/// <data_path>/<id>/{tmp.csv, data.xml, data-<id>-<surname><ext>, data-<id>-trial<ext>, manifest.json}
struct ArchivePaths
{
	fs::path dir;
	fs::path data_xml;
	fs::path participant_csv;
	fs::path trial_csv;
	fs::path tmp_csv;
	fs::path manifest;

	static ArchivePaths in_dir(const fs::path& dir, const Participant& participant, const ExperimentParams& experiment);

	friend bool operator==(const ArchivePaths&, const ArchivePaths&) = default;
};

/// First of <data_path>/<id>, <id>_v2, <id>_v3, ... that holds no session yet.
fs::path allocate_session_dir(const fs::path& data_path, const std::string& participant_id);

struct SessionArchive
{
	std::string data_name = "data.demo";
	Participant participant;
	std::vector<TrialRecord> trials;
	ArchivePaths paths;

	friend bool operator==(const SessionArchive&, const SessionArchive&) = default;
};

// Trial line grammar:
//   ID,No,PRESENTATION,R1,<R1 x (t,fx,fy,fz,tx,ty,tz)>,R2,<R2 x ...>,DISTANCE,RESPONSE
// The trial file prefixes its first line with "<No OF TRIALS>,".
std::string format_trial_line(const TrialRecord& record);
std::string format_trial_csv(std::span<const TrialRecord> records);
std::string format_participant_csv(const Participant& participant);
std::string format_data_xml(const std::string& data_name, const ExperimentParams& experiment,
	const std::string& participant_file, const std::string& trial_file);

/// Parses trial lines. Labels and touched flags come from `manifest` when given; otherwise
/// every trial is labelled Trial and untouched. Throws FormatError naming trial and line.
std::vector<TrialRecord> parse_trial_csv(std::string_view text, const SessionManifest* manifest = nullptr);
std::vector<TrialRecord> parse_tmp_csv(std::string_view text, const SessionManifest* manifest = nullptr);
Participant parse_participant_csv(std::string_view text);

/// Appends one trial line and syncs it to disk before returning.
void append_trial_tmp(const fs::path& path, const TrialRecord& record);

/// Writes data.xml and both CSVs. If the directory already holds a data.xml the archive goes to the
/// next free versioned directory instead. Returns the paths actually written.
ArchivePaths write_archive(const SessionArchive& archive, const ExperimentParams& experiment);

std::vector<TrialRecord> read_trial_csv(const fs::path& path, const SessionManifest* manifest = nullptr);
std::vector<TrialRecord> read_tmp_csv(const fs::path& path, const SessionManifest* manifest = nullptr);

/// Reads data.xml, the files it links and, when present, manifest.json.
SessionArchive read_archive(const fs::path& dir);

std::string read_text_file(const fs::path& path);
/// Writes via a temporary file and rename.
void write_text_file(const fs::path& path, std::string_view text);

// CSV field helpers (RFC 4180 quoting).
std::string csv_field(std::string_view value);
std::vector<std::string> split_csv_line(std::string_view line);

} // namespace tactile

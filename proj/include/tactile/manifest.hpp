#pragma once

#include <tactile/records.hpp>
#include <tactile/rig_sim.hpp>

#include <json.hpp>

#include <cstdint>
#include <filesystem>
#include <optional>
#include <string>
#include <vector>

namespace tactile {

/// Per-line facts the trial CSV does not carry.
struct ManifestTrial
{
	int no = 1;
	TrialLabel label = TrialLabel::Trial;
	int index = 1;
	bool touched_first = false;
	bool touched_second = false;

	friend bool operator==(const ManifestTrial&, const ManifestTrial&) = default;
};

struct QuotaEntry
{
	double distance = 0.0;
	int remaining = 0;

	friend bool operator==(const QuotaEntry&, const QuotaEntry&) = default;
};

/// Sidecar of a session directory: everything needed to replay or resume the session
/// and to restore the fields the CSV formats leave out.
struct SessionManifest
{
	static constexpr int kFormat = 1;

	std::uint64_t seed = 0;
	bool debug_mode = false;
	std::string config_path;
	std::string config_xml;
	FingerModel finger;
	std::optional<Participant> participant;
	std::vector<ManifestTrial> trials;
	std::vector<QuotaEntry> quotas;
	/// Operator command log in wire format, in the order applied.
	std::vector<nlohmann::json> commands;
	std::string status = "running"; // running | complete | cancelled
	std::string reason;

	friend bool operator==(const SessionManifest&, const SessionManifest&) = default;
};

nlohmann::json to_json(const SessionManifest& manifest);
SessionManifest manifest_from_json(const nlohmann::json& j);

/// Written to a temporary file and renamed into place.
void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest);
SessionManifest read_manifest(const std::filesystem::path& path);

nlohmann::json to_json(const FingerModel& finger);
FingerModel finger_from_json(const nlohmann::json& j);

} // namespace tactile

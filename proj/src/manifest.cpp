#include <tactile/manifest.hpp>

#include <tactile/error.hpp>

#include <fmt/format.h>

#include <fstream>
#include <sstream>

namespace tactile {

using nlohmann::json;

json to_json(const FingerModel& f)
{
	return { { "surface_height", f.surface_height }, { "center_y", f.center_y }, { "half_width", f.half_width },
		{ "stiffness", f.stiffness }, { "noise_std_force", f.noise_std_force },
		{ "noise_std_torque", f.noise_std_torque } };
}

FingerModel finger_from_json(const json& j)
{
	FingerModel f;
	f.surface_height = j.value("surface_height", f.surface_height);
	f.center_y = j.value("center_y", f.center_y);
	f.half_width = j.value("half_width", f.half_width);
	f.stiffness = j.value("stiffness", f.stiffness);
	f.noise_std_force = j.value("noise_std_force", f.noise_std_force);
	f.noise_std_torque = j.value("noise_std_torque", f.noise_std_torque);
	return f;
}

json to_json(const SessionManifest& m)
{
	json j;
	j["format"] = SessionManifest::kFormat;
	j["seed"] = m.seed;
	j["debug_mode"] = m.debug_mode;
	j["config_path"] = m.config_path;
	j["config_xml"] = m.config_xml;
	j["finger"] = to_json(m.finger);
	if (m.participant) {
		const auto& p = *m.participant;
		j["participant"] = { { "id", p.id }, { "name", p.name }, { "surname", p.surname }, { "age", p.age },
			{ "gender", to_string(p.gender) }, { "notes", p.notes } };
	}
	else
		j["participant"] = nullptr;
	j["trials"] = json::array();
	for (const auto& t : m.trials)
		j["trials"].push_back({ { "no", t.no }, { "label", to_string(t.label) }, { "index", t.index },
			{ "touched_first", t.touched_first }, { "touched_second", t.touched_second } });
	j["quotas"] = json::array();
	for (const auto& q : m.quotas)
		j["quotas"].push_back({ { "distance", q.distance }, { "remaining", q.remaining } });
	j["commands"] = m.commands;
	j["status"] = m.status;
	j["reason"] = m.reason;
	return j;
}

SessionManifest manifest_from_json(const json& j)
{
	try {
		if (j.at("format").get<int>() != SessionManifest::kFormat)
			throw FormatError(fmt::format("unsupported manifest format {}", j.at("format").dump()));
		SessionManifest m;
		m.seed = j.at("seed").get<std::uint64_t>();
		m.debug_mode = j.at("debug_mode").get<bool>();
		m.config_path = j.at("config_path").get<std::string>();
		m.config_xml = j.at("config_xml").get<std::string>();
		m.finger = finger_from_json(j.at("finger"));
		if (!j.at("participant").is_null()) {
			const auto& pj = j.at("participant");
			Participant p;
			p.id = pj.at("id").get<std::string>();
			p.name = pj.at("name").get<std::string>();
			p.surname = pj.at("surname").get<std::string>();
			p.age = pj.at("age").get<int>();
			const auto gender = parse_gender(pj.at("gender").get<std::string>());
			if (!gender)
				throw FormatError("manifest: unknown gender");
			p.gender = *gender;
			p.notes = pj.at("notes").get<std::string>();
			m.participant = p;
		}
		for (const auto& tj : j.at("trials")) {
			ManifestTrial t;
			t.no = tj.at("no").get<int>();
			const auto label = parse_label(tj.at("label").get<std::string>());
			if (!label)
				throw FormatError("manifest: unknown trial label");
			t.label = *label;
			t.index = tj.at("index").get<int>();
			t.touched_first = tj.at("touched_first").get<bool>();
			t.touched_second = tj.at("touched_second").get<bool>();
			m.trials.push_back(t);
		}
		for (const auto& qj : j.at("quotas"))
			m.quotas.push_back({ qj.at("distance").get<double>(), qj.at("remaining").get<int>() });
		for (const auto& c : j.at("commands"))
			m.commands.push_back(c);
		m.status = j.at("status").get<std::string>();
		m.reason = j.at("reason").get<std::string>();
		return m;
	}
	catch (const json::exception& e) {
		throw FormatError(fmt::format("manifest: {}", e.what()));
	}
}

void write_manifest(const std::filesystem::path& path, const SessionManifest& manifest)
{
	const auto tmp = std::filesystem::path(path.string() + ".part");
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out)
			throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
		out << to_json(manifest).dump(2) << '\n';
		if (!out.flush())
			throw Error(fmt::format("write to '{}' failed", tmp.string()));
	}
	std::filesystem::rename(tmp, path);
}

SessionManifest read_manifest(const std::filesystem::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(fmt::format("cannot open manifest '{}'", path.string()));
	json j;
	try {
		in >> j;
	}
	catch (const json::exception& e) {
		throw FormatError(fmt::format("manifest '{}': {}", path.string(), e.what()));
	}
	return manifest_from_json(j);
}

} // namespace tactile

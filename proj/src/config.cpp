#include <tactile/config.hpp>

#include <tactile/error.hpp>
#include <tactile/xml_document.hpp>

#include <fmt/format.h>

#include <charconv>
#include <cmath>
#include <fstream>
#include <initializer_list>
#include <set>
#include <sstream>

namespace tactile {

namespace {

using xml::Element;

// Prose spelling (num_*) accepted as an alias of the canonical attribute name.
struct Alias
{
	std::string_view canonical;
	std::string_view alternative;
};

constexpr Alias kExperimentAliases[] = {
	{ "number_training_trials", "num_training_trials" },
	{ "number_presentations", "num_presentations" },
	{ "number_ftdata_recordings", "num_ftdata_recordings" },
};

std::string locate(const Element& e) { return fmt::format("<{}> (line {})", e.name, e.line); }

class Reader
{
public:
	explicit Reader(std::vector<std::string>* warnings) : warnings_(warnings) {}

	const std::string& required(const Element& e, std::string_view key) const
	{
		if (const auto* v = e.attribute(key))
			return *v;
		if (e.name == "experiment_data")
			for (const auto& alias : kExperimentAliases)
				if (alias.canonical == key)
					if (const auto* v = e.attribute(alias.alternative))
						return *v;
		throw ConfigError(ConfigError::Kind::Schema,
			fmt::format("missing attribute '{}' on {}", key, locate(e)));
	}

	double number(const Element& e, std::string_view key) const { return to_double(e, key, required(e, key)); }

	double number_or(const Element& e, std::string_view key, double fallback) const
	{
		const auto* v = e.attribute(key);
		return v ? to_double(e, key, *v) : fallback;
	}

	int integer(const Element& e, std::string_view key) const
	{
		const auto& text = required(e, key);
		int value = 0;
		const auto* first = text.data();
		const auto* last = text.data() + text.size();
		if (first != last && *first == '+')
			++first;
		auto [ptr, ec] = std::from_chars(first, last, value);
		if (ec != std::errc() || ptr != last || first == last)
			throw ConfigError(ConfigError::Kind::Type,
				fmt::format("attribute '{}' on {} is not an integer: \"{}\"", key, locate(e), text));
		return value;
	}

	Pose3 pose(const Element& e) const { return { number(e, "v1"), number(e, "v2"), number(e, "v3") }; }

	const Element& child(const Element& parent, std::string_view name) const
	{
		for (const auto& c : parent.children)
			if (c.name == name)
				return c;
		throw ConfigError(ConfigError::Kind::Schema,
			fmt::format("missing element <{}> inside {}", name, locate(parent)));
	}

	void check_attributes(const Element& e, std::initializer_list<std::string_view> known) const
	{
		if (!warnings_)
			return;
		for (const auto& [key, value] : e.attributes) {
			bool ok = false;
			for (auto k : known)
				ok = ok || k == key;
			if (e.name == "experiment_data")
				for (const auto& alias : kExperimentAliases)
					ok = ok || alias.alternative == key;
			if (!ok)
				warnings_->push_back(fmt::format("unknown attribute '{}' on {} ignored", key, locate(e)));
		}
	}

	void check_children(const Element& e, std::initializer_list<std::string_view> known) const
	{
		if (!warnings_)
			return;
		for (const auto& c : e.children) {
			bool ok = false;
			for (auto k : known)
				ok = ok || k == c.name;
			if (!ok)
				warnings_->push_back(fmt::format("unknown element {} ignored", locate(c)));
		}
	}

private:
	static double to_double(const Element& e, std::string_view key, const std::string& text)
	{
		double value = 0.0;
		const auto* first = text.data();
		const auto* last = text.data() + text.size();
		if (first != last && *first == '+')
			++first;
		auto [ptr, ec] = std::from_chars(first, last, value);
		if (ec != std::errc() || ptr != last || first == last)
			throw ConfigError(ConfigError::Kind::Type,
				fmt::format("attribute '{}' on {} is not a number: \"{}\"", key, locate(e), text));
		return value;
	}

	std::vector<std::string>* warnings_;
};

void check_pose(ValidationReport& report, const std::string& where, const Pose3& p)
{
	const double components[] = { p.v1, p.v2, p.v3 };
	for (int i = 0; i < 3; ++i) {
		const auto loc = fmt::format("{}/@v{}", where, i + 1);
		if (!std::isfinite(components[i]))
			report.push_back({ loc, "component is not finite" });
		else if (std::abs(components[i]) > kWorkspaceBound)
			report.push_back({ loc, fmt::format("component exceeds workspace bound of {} m", kWorkspaceBound) });
	}
}

void check_positive(ValidationReport& report, const std::string& where, double value, std::string_view what)
{
	if (!(value > 0.0) || !std::isfinite(value))
		report.push_back({ where, fmt::format("{} must be positive and finite", what) });
}

} // namespace

std::vector<double> DemoConfig::distances() const
{
	std::vector<double> out;
	out.reserve(smposes.size());
	for (const auto& sm : smposes)
		out.push_back(sm.c1);
	return out;
}

DemoConfig parse_demo_config(std::string_view xml_text, std::vector<std::string>* warnings)
{
	const Element root = xml::parse(xml_text);
	const Element* demo = root.find("demo");
	if (!demo)
		throw ConfigError(ConfigError::Kind::Schema, "missing element <demo>");

	Reader r(warnings);
	DemoConfig cfg;
	r.check_attributes(*demo, { "data_name" });
	r.check_children(*demo, { "wpose", "smpose", "touch", "experiment_data" });
	if (const auto* name = demo->attribute("data_name"))
		cfg.data_name = *name;

	for (const auto& e : demo->children) {
		if (e.name == "wpose") {
			r.check_attributes(e, { "name", "v1", "v2", "v3" });
			cfg.wposes.push_back({ r.required(e, "name"), r.pose(e) });
		}
		else if (e.name == "smpose") {
			r.check_attributes(e, { "name", "dim", "c1", "c2" });
			cfg.smposes.push_back({ r.number(e, "c1"), r.number_or(e, "c2", 0.0) });
		}
	}

	const Element& touch = r.child(*demo, "touch");
	r.check_attributes(touch, { "sensor", "event_time_wait", "movement_duration", "poking_duration" });
	r.check_children(touch, { "threshold", "motion_single_pin", "motion_two_pins", "poking", "init" });
	cfg.touch.sensor_id = r.required(touch, "sensor");
	cfg.touch.event_time_wait = r.number(touch, "event_time_wait");
	cfg.touch.movement_duration = r.number(touch, "movement_duration");
	cfg.touch.poking_duration = r.number(touch, "poking_duration");

	const Element& th = r.child(touch, "threshold");
	r.check_attributes(th, { "v1", "v2", "v3", "w1", "w2", "w3" });
	cfg.touch.threshold = { r.number(th, "v1"), r.number(th, "v2"), r.number(th, "v3"),
		r.number(th, "w1"), r.number(th, "w2"), r.number(th, "w3") };

	const auto pose_child = [&](std::string_view name) {
		const Element& e = r.child(touch, name);
		r.check_attributes(e, { "v1", "v2", "v3" });
		return r.pose(e);
	};
	cfg.touch.motion_single_pin = pose_child("motion_single_pin");
	cfg.touch.motion_two_pins = pose_child("motion_two_pins");
	cfg.touch.poking = pose_child("poking");
	cfg.touch.init = pose_child("init");

	const Element& ex = r.child(*demo, "experiment_data");
	r.check_attributes(ex, { "participant_ext_file", "trial_ext_file", "number_training_trials", "training_index",
		"number_presentations", "number_ftdata_recordings", "path" });
	cfg.experiment.participant_ext_file = r.required(ex, "participant_ext_file");
	cfg.experiment.trial_ext_file = r.required(ex, "trial_ext_file");
	cfg.experiment.number_training_trials = r.integer(ex, "number_training_trials");
	cfg.experiment.training_index = r.integer(ex, "training_index");
	cfg.experiment.number_presentations = r.integer(ex, "number_presentations");
	cfg.experiment.number_ftdata_recordings = r.integer(ex, "number_ftdata_recordings");
	cfg.experiment.data_path = r.required(ex, "path");

	return cfg;
}

DemoConfig load_demo_config(const std::string& path, std::vector<std::string>* warnings)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw ConfigError(ConfigError::Kind::Parse, fmt::format("cannot open config file '{}'", path));
	std::ostringstream buffer;
	buffer << in.rdbuf();
	return parse_demo_config(buffer.str(), warnings);
}

ValidationReport validate_config(const DemoConfig& cfg)
{
	ValidationReport report;

	for (size_t i = 0; i < cfg.wposes.size(); ++i) {
		const auto where = fmt::format("demo/wpose[{}]", i + 1);
		if (cfg.wposes[i].name.empty())
			report.push_back({ where + "/@name", "pose name is empty" });
		check_pose(report, where, cfg.wposes[i].pose);
	}

	if (cfg.smposes.empty())
		report.push_back({ "demo/smpose", "no poses for the stepper motor" });
	std::set<double> seen;
	for (size_t i = 0; i < cfg.smposes.size(); ++i) {
		const auto where = fmt::format("demo/smpose[{}]/@c1", i + 1);
		const double c1 = cfg.smposes[i].c1;
		if (!std::isfinite(c1) || c1 < 0.0 || c1 > kMaxSeparation)
			report.push_back({ where, fmt::format("separation must lie in [0, {}] m", kMaxSeparation) });
		else if (!seen.insert(c1).second)
			report.push_back({ where, "duplicate separation" });
		if (!std::isfinite(cfg.smposes[i].c2))
			report.push_back({ fmt::format("demo/smpose[{}]/@c2", i + 1), "value is not finite" });
	}

	const auto& t = cfg.touch;
	check_positive(report, "demo/touch/@event_time_wait", t.event_time_wait, "duration");
	check_positive(report, "demo/touch/@movement_duration", t.movement_duration, "duration");
	check_positive(report, "demo/touch/@poking_duration", t.poking_duration, "duration");
	const char* names[] = { "v1", "v2", "v3", "w1", "w2", "w3" };
	const auto channels = t.threshold.channels();
	for (size_t i = 0; i < channels.size(); ++i)
		check_positive(report, fmt::format("demo/touch/threshold/@{}", names[i]), channels[i], "threshold");
	check_pose(report, "demo/touch/motion_single_pin", t.motion_single_pin);
	check_pose(report, "demo/touch/motion_two_pins", t.motion_two_pins);
	check_pose(report, "demo/touch/poking", t.poking);
	check_pose(report, "demo/touch/init", t.init);

	const auto& x = cfg.experiment;
	if (x.number_training_trials < 0)
		report.push_back({ "demo/experiment_data/@number_training_trials", "must not be negative" });
	if (x.number_training_trials > 0 && (x.training_index < 1 || x.training_index > x.number_training_trials))
		report.push_back({ "demo/experiment_data/@training_index", "must lie in [1, number_training_trials]" });
	if (x.number_presentations < 1)
		report.push_back({ "demo/experiment_data/@number_presentations", "must be at least 1" });
	if (x.number_ftdata_recordings < 1)
		report.push_back({ "demo/experiment_data/@number_ftdata_recordings", "must be at least 1" });
	if (x.data_path.empty())
		report.push_back({ "demo/experiment_data/@path", "data path is empty" });

	return report;
}

std::string format_double(double value)
{
	char buf[64];
	auto [ptr, ec] = std::to_chars(buf, buf + sizeof(buf), value);
	return std::string(buf, ptr);
}

std::string serialize_demo_config(const DemoConfig& cfg)
{
	const auto report = validate_config(cfg);
	if (!report.empty())
		throw ConfigError(ConfigError::Kind::Invalid,
			fmt::format("refusing to serialize invalid config: {}: {}", report.front().locator, report.front().message));

	const auto esc = [](const std::string& s) { return xml::escape_attribute(s); };
	const auto num = [](double v) { return format_double(v); };
	const auto pose = [&](const Pose3& p) {
		return fmt::format("v1=\"{}\" v2=\"{}\" v3=\"{}\"", num(p.v1), num(p.v2), num(p.v3));
	};

	std::string out;
	out += "<?xml version=\"1.0\" encoding=\"utf-8\"?>\n\n<golem>\n";
	out += fmt::format("  <demo data_name=\"{}\">\n", esc(cfg.data_name));
	for (const auto& w : cfg.wposes)
		out += fmt::format("    <wpose name=\"{}\" {}/>\n", esc(w.name), pose(w.pose));
	for (const auto& sm : cfg.smposes)
		out += fmt::format("    <smpose name=\"sm_commands\" dim=\"2\" c1=\"{}\" c2=\"{}\"/>\n", num(sm.c1), num(sm.c2));

	const auto& t = cfg.touch;
	out += fmt::format("    <touch sensor=\"{}\" event_time_wait=\"{}\" movement_duration=\"{}\" poking_duration=\"{}\">\n",
		esc(t.sensor_id), num(t.event_time_wait), num(t.movement_duration), num(t.poking_duration));
	out += fmt::format("      <threshold v1=\"{}\" v2=\"{}\" v3=\"{}\" w1=\"{}\" w2=\"{}\" w3=\"{}\"/>\n",
		num(t.threshold.v1), num(t.threshold.v2), num(t.threshold.v3),
		num(t.threshold.w1), num(t.threshold.w2), num(t.threshold.w3));
	out += fmt::format("      <motion_single_pin {}/>\n", pose(t.motion_single_pin));
	out += fmt::format("      <motion_two_pins {}/>\n", pose(t.motion_two_pins));
	out += fmt::format("      <poking {}/>\n", pose(t.poking));
	out += fmt::format("      <init {}/>\n", pose(t.init));
	out += "    </touch>\n";

	const auto& x = cfg.experiment;
	out += fmt::format("    <experiment_data participant_ext_file=\"{}\" trial_ext_file=\"{}\" "
		"number_training_trials=\"{}\" training_index=\"{}\" number_presentations=\"{}\" "
		"number_ftdata_recordings=\"{}\" path=\"{}\"></experiment_data>\n",
		esc(x.participant_ext_file), esc(x.trial_ext_file), x.number_training_trials, x.training_index,
		x.number_presentations, x.number_ftdata_recordings, esc(x.data_path));
	out += "  </demo>\n</golem>\n";
	return out;
}

} // namespace tactile

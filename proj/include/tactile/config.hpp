#pragma once

#include <array>
#include <string>
#include <string_view>
#include <vector>

namespace tactile {

/// Cartesian vector or position in meters (rig x, y, z).
struct Pose3
{
	double v1 = 0.0;
	double v2 = 0.0;
	double v3 = 0.0;

	friend bool operator==(const Pose3&, const Pose3&) = default;
	friend Pose3 operator+(const Pose3& a, const Pose3& b) { return { a.v1 + b.v1, a.v2 + b.v2, a.v3 + b.v3 }; }
	friend Pose3 operator-(const Pose3& a, const Pose3& b) { return { a.v1 - b.v1, a.v2 - b.v2, a.v3 - b.v3 }; }
	friend Pose3 operator*(double s, const Pose3& a) { return { s * a.v1, s * a.v2, s * a.v3 }; }
};

struct NamedPose
{
	std::string name;
	Pose3 pose;

	friend bool operator==(const NamedPose&, const NamedPose&) = default;
};

/// Stepper motor command. c1 is the pin separation in meters; c2 is reserved and carried through unchanged.
struct StepperCommand
{
	double c1 = 0.0;
	double c2 = 0.0;

	friend bool operator==(const StepperCommand&, const StepperCommand&) = default;
};

/// Contact thresholds: forces v1..v3 in N, torques w1..w3 in N·m.
struct Threshold
{
	double v1 = 0.5, v2 = 0.5, v3 = 0.25;
	double w1 = 0.1, w2 = 0.1, w3 = 0.1;

	std::array<double, 6> channels() const { return { v1, v2, v3, w1, w2, w3 }; }

	friend bool operator==(const Threshold&, const Threshold&) = default;
};

struct TouchParams
{
	std::string sensor_id = "FTDAQ+FTDAQ_Delta3";
	double event_time_wait = 0.10;   // s
	double movement_duration = 2.0;  // s
	double poking_duration = 5.0;    // s
	Threshold threshold;
	Pose3 motion_single_pin{ 0.0, 0.024, 0.0 };
	Pose3 motion_two_pins{ 0.0, -0.018, 0.0 };
	Pose3 poking{ 0.0, 0.0, -0.02 };
	Pose3 init{ -0.1, 0.0, -0.075 };

	friend bool operator==(const TouchParams&, const TouchParams&) = default;
};

struct ExperimentParams
{
	std::string participant_ext_file = ".csv";
	std::string trial_ext_file = ".csv";
	int number_training_trials = 1;
	int training_index = 1;
	int number_presentations = 10;
	int number_ftdata_recordings = 10;
	std::string data_path = "./data/";

	friend bool operator==(const ExperimentParams&, const ExperimentParams&) = default;
};

/// Everything inside the `<demo>` element of a rig configuration file.
struct DemoConfig
{
	std::string data_name = "data.demo";
	std::vector<NamedPose> wposes;
	std::vector<StepperCommand> smposes;
	TouchParams touch;
	ExperimentParams experiment;

	/// c1 of every smpose, in file order.
	std::vector<double> distances() const;

	friend bool operator==(const DemoConfig&, const DemoConfig&) = default;
};

struct Finding
{
	std::string locator; // e.g. "demo/touch/@event_time_wait"
	std::string message;

	friend bool operator==(const Finding&, const Finding&) = default;
};

using ValidationReport = std::vector<Finding>;

/// Largest |component| accepted for any pose, m.
inline constexpr double kWorkspaceBound = 0.5;
/// Largest pin separation accepted for a stepper command, m.
inline constexpr double kMaxSeparation = 0.01;

/// Parses the `<demo>` element found anywhere in `xml_text`.
/// Unknown elements and attributes are skipped and, if `warnings` is given, reported there.
/// Throws ConfigError: Parse (malformed XML, message carries the line), Schema (missing
/// element/attribute, named in the message) or Type (non-numeric value).
DemoConfig parse_demo_config(std::string_view xml_text, std::vector<std::string>* warnings = nullptr);

DemoConfig load_demo_config(const std::string& path, std::vector<std::string>* warnings = nullptr);

/// Empty iff the config can drive a session.
ValidationReport validate_config(const DemoConfig& cfg);

/// Inverse of parse_demo_config on the semantic model. Throws ConfigError(Invalid)
/// naming the first finding when the config does not validate.
std::string serialize_demo_config(const DemoConfig& cfg);

/// Shortest decimal text that parses back to exactly `value`.
std::string format_double(double value);

} // namespace tactile

#pragma once

#include <tactile/config.hpp>

#include <cstdint>
#include <random>
#include <vector>

namespace tactile {

/// Virtual clock resolution, s. All simulated durations are rounded up to a whole number of quanta.
inline constexpr double kClockQuantum = 0.01;

/// Stepper motor resolution: steps per millimetre of pin separation.
inline constexpr double kStepsPerMillimetre = 363.0;

/// Converts a duration to clock ticks, rounding up (with a tolerance for decimal noise such as 0.1/0.01).
std::int64_t to_ticks(double seconds);
inline double to_seconds(std::int64_t ticks) { return static_cast<double>(ticks) * kClockQuantum; }

/// Snapshot of the simulated delta robot, stepper motor and their lifecycle.
/// Poses are global, in meters. Time only moves forward.
struct RigState
{
	Pose3 effector_pose;
	double stepper_separation = 0.0;
	std::int64_t ticks = 0;
	bool powered = false;
	bool initialised = false;
	bool checked = false;

	double sim_time() const { return to_seconds(ticks); }
	bool ready() const { return powered && initialised && checked; }

	friend bool operator==(const RigState&, const RigState&) = default;
};

/// The fingertip the rig pokes: a flat surface at `surface_height`, spanning
/// [center_y - half_width, center_y + half_width] laterally, acting as a linear spring on fz.
struct FingerModel
{
	double surface_height = -0.085;
	double center_y = 0.0;
	double half_width = 0.03;
	double stiffness = 500.0;        // N/m
	double noise_std_force = 0.01;   // N
	double noise_std_torque = 0.001; // N·m

	/// Places the surface far below any reachable pose: every poke runs its full travel.
	static FingerModel absent();

	friend bool operator==(const FingerModel&, const FingerModel&) = default;
};

struct FtSample
{
	bool touched = false;
	double timestamp = 0.0; // s
	double fx = 0.0, fy = 0.0, fz = 0.0;
	double tx = 0.0, ty = 0.0, tz = 0.0;

	std::array<double, 6> channels() const { return { fx, fy, fz, tx, ty, tz }; }

	friend bool operator==(const FtSample&, const FtSample&) = default;
};

struct FtRecording
{
	std::vector<FtSample> samples;
	bool touched = false;

	friend bool operator==(const FtRecording&, const FtRecording&) = default;
};

struct PokeResult
{
	FtRecording recording;
	Pose3 stop_pose;
	bool stopped_on_contact = false;
	/// Samples polled while descending; the last one tripped the threshold iff stopped_on_contact.
	std::vector<FtSample> motion_samples;
};

struct PokeParams
{
	double event_time_wait = 0.10;
	int number_ftdata_recordings = 10;
};

using NoiseSource = std::mt19937_64;

// Lifecycle: power on, then initialise, then check. Each step requires the previous one.
RigState power_on(RigState state);
RigState initialise(RigState state);
RigState check(RigState state);
/// power_on + initialise + check.
RigState bring_up(RigState state = {});

RigState move_relative(const RigState& state, const Pose3& delta, double min_duration);
RigState move_global(const RigState& state, const Pose3& target, double min_duration);
RigState set_stepper(const RigState& state, double separation);

/// Steps the operator enters for a separation given in meters. Throws RigError(Domain) if negative.
double stepper_steps(double distance_m);

/// One six-channel reading at the current rig pose and time. `touched` is left false.
FtSample sample_ft(const RigState& state, const FingerModel& finger, NoiseSource& rng);

/// True iff any |channel| reaches its threshold (boundary inclusive).
bool detect_contact(const FtSample& sample, const Threshold& threshold);

struct PokeOutcome
{
	RigState state;
	PokeResult result;
};

/// Descends along `poking` over `poking_duration`, polling the sensor every event_time_wait and
/// halting on the first contact, then records number_ftdata_recordings samples at the stop pose.
PokeOutcome execute_poke(const RigState& state, const Pose3& poking, double poking_duration,
	const Threshold& threshold, const FingerModel& finger, const PokeParams& params, NoiseSource& rng);

} // namespace tactile

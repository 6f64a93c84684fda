#include <tactile/rig_sim.hpp>

#include <tactile/error.hpp>

#include <fmt/format.h>

#include <algorithm>
#include <cmath>

namespace tactile {

namespace {

void require_ready(const RigState& state, const char* what)
{
	if (!state.ready())
		throw RigError(RigError::Kind::Lifecycle,
			fmt::format("{}: rig not ready (powered={}, initialised={}, checked={})", what, state.powered,
				state.initialised, state.checked));
}

bool finite(const Pose3& p) { return std::isfinite(p.v1) && std::isfinite(p.v2) && std::isfinite(p.v3); }

void require_in_workspace(const Pose3& target)
{
	if (!finite(target) || std::abs(target.v1) > kWorkspaceBound || std::abs(target.v2) > kWorkspaceBound ||
		std::abs(target.v3) > kWorkspaceBound)
		throw RigError(RigError::Kind::Workspace,
			fmt::format("target ({}, {}, {}) outside workspace bound of {} m", target.v1, target.v2, target.v3,
				kWorkspaceBound));
}

RigState travel(const RigState& state, const Pose3& target, double min_duration)
{
	require_in_workspace(target);
	if (!(min_duration >= 0.0))
		throw RigError(RigError::Kind::Domain, "motion duration must not be negative");
	RigState next = state;
	next.effector_pose = target;
	next.ticks += to_ticks(min_duration);
	return next;
}

} // namespace

std::int64_t to_ticks(double seconds)
{
	const double q = seconds / kClockQuantum;
	const double nearest = std::round(q);
	if (std::abs(q - nearest) < 1e-6)
		return static_cast<std::int64_t>(nearest);
	return static_cast<std::int64_t>(std::ceil(q));
}

FingerModel FingerModel::absent()
{
	FingerModel finger;
	finger.surface_height = -10.0;
	return finger;
}

RigState power_on(RigState state)
{
	state.powered = true;
	return state;
}

RigState initialise(RigState state)
{
	if (!state.powered)
		throw RigError(RigError::Kind::Lifecycle, "initialise: controller is not powered");
	state.initialised = true;
	return state;
}

RigState check(RigState state)
{
	if (!state.initialised)
		throw RigError(RigError::Kind::Lifecycle, "check: device has not been initialised");
	state.checked = true;
	return state;
}

RigState bring_up(RigState state) { return check(initialise(power_on(state))); }

RigState move_relative(const RigState& state, const Pose3& delta, double min_duration)
{
	require_ready(state, "move_relative");
	if (!finite(delta))
		throw RigError(RigError::Kind::Domain, "move_relative: displacement is not finite");
	return travel(state, state.effector_pose + delta, min_duration);
}

RigState move_global(const RigState& state, const Pose3& target, double min_duration)
{
	require_ready(state, "move_global");
	return travel(state, target, min_duration);
}

RigState set_stepper(const RigState& state, double separation)
{
	if (!(separation >= 0.0) || !std::isfinite(separation))
		throw RigError(RigError::Kind::Domain, fmt::format("stepper separation {} m is invalid", separation));
	if (!state.powered)
		throw RigError(RigError::Kind::Lifecycle, "set_stepper: rig not powered");
	RigState next = state;
	next.stepper_separation = separation;
	return next;
}

double stepper_steps(double distance_m)
{
	if (!(distance_m >= 0.0))
		throw RigError(RigError::Kind::Domain, fmt::format("stepper distance {} m is negative", distance_m));
	return distance_m * 1000.0 * kStepsPerMillimetre;
}

FtSample sample_ft(const RigState& state, const FingerModel& finger, NoiseSource& rng)
{
	std::normal_distribution<double> unit(0.0, 1.0);
	double noise[6];
	for (auto& n : noise)
		n = unit(rng);

	const double y = state.effector_pose.v2;
	const bool over_finger = std::abs(y - finger.center_y) <= finger.half_width;
	const double penetration = over_finger ? std::max(0.0, finger.surface_height - state.effector_pose.v3) : 0.0;

	FtSample s;
	s.timestamp = state.sim_time();
	// "+ 0.0" folds negative zero from zero-std noise into +0.
	s.fx = finger.noise_std_force * noise[0] + 0.0;
	s.fy = finger.noise_std_force * noise[1] + 0.0;
	s.fz = -finger.stiffness * penetration + finger.noise_std_force * noise[2] + 0.0;
	s.tx = finger.noise_std_torque * noise[3] + 0.0;
	s.ty = finger.noise_std_torque * noise[4] + 0.0;
	s.tz = finger.noise_std_torque * noise[5] + 0.0;
	return s;
}

bool detect_contact(const FtSample& sample, const Threshold& threshold)
{
	const auto values = sample.channels();
	const auto limits = threshold.channels();
	for (size_t i = 0; i < values.size(); ++i)
		if (std::abs(values[i]) >= limits[i])
			return true;
	return false;
}

PokeOutcome execute_poke(const RigState& state, const Pose3& poking, double poking_duration,
	const Threshold& threshold, const FingerModel& finger, const PokeParams& params, NoiseSource& rng)
{
	require_ready(state, "execute_poke");
	require_in_workspace(state.effector_pose + poking);
	if (params.number_ftdata_recordings < 1)
		throw RigError(RigError::Kind::Domain, "number_ftdata_recordings must be at least 1");

	const std::int64_t step = std::max<std::int64_t>(1, to_ticks(params.event_time_wait));
	const std::int64_t total = to_ticks(poking_duration);
	const Pose3 start = state.effector_pose;

	PokeOutcome out{ state, {} };
	RigState& rig = out.state;
	PokeResult& result = out.result;

	// Descent at constant velocity, polled every `step` ticks and once more at the end of travel.
	std::int64_t elapsed = 0;
	while (elapsed < total) {
		elapsed = std::min(elapsed + step, total);
		const double fraction = static_cast<double>(elapsed) / static_cast<double>(total);
		rig.effector_pose = start + fraction * poking;
		rig.ticks = state.ticks + elapsed;
		const FtSample s = sample_ft(rig, finger, rng);
		result.motion_samples.push_back(s);
		if (detect_contact(s, threshold)) {
			result.stopped_on_contact = true;
			break;
		}
	}
	if (total == 0)
		rig.effector_pose = start + poking;

	result.stop_pose = rig.effector_pose;
	result.recording.touched = result.stopped_on_contact;
	for (int i = 0; i < params.number_ftdata_recordings; ++i) {
		rig.ticks += step;
		FtSample s = sample_ft(rig, finger, rng);
		s.touched = result.stopped_on_contact;
		result.recording.samples.push_back(s);
	}
	return out;
}

} // namespace tactile

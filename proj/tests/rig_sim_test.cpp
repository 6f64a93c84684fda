#include "test_support.hpp"

#include <tactile/error.hpp>
#include <tactile/rig_sim.hpp>

#include <gtest/gtest.h>

#include <cmath>

using namespace tactile;
using namespace tactile::test;

namespace {

const Pose3 kInit{ -0.1, 0.0, -0.075 };
const Pose3 kPoking{ 0.0, 0.0, -0.02 };
const Threshold kThreshold{ 0.5, 0.5, 0.25, 0.1, 0.1, 0.1 };

RigState at_init() { return move_global(bring_up(), kInit, 2.0); }

FingerModel quiet(FingerModel f = {})
{
	f.noise_std_force = 0.0;
	f.noise_std_torque = 0.0;
	return f;
}

PokeOutcome poke(const RigState& rig, const FingerModel& finger, std::uint64_t seed, Pose3 poking = kPoking)
{
	NoiseSource rng(seed);
	return execute_poke(rig, poking, 5.0, kThreshold, finger, PokeParams{ 0.10, 10 }, rng);
}

void expect_near_pose(const Pose3& a, const Pose3& b, double tol = 1e-12)
{
	EXPECT_NEAR(a.v1, b.v1, tol);
	EXPECT_NEAR(a.v2, b.v2, tol);
	EXPECT_NEAR(a.v3, b.v3, tol);
}

} // namespace

TEST(Clock, TicksRoundUpWithDecimalTolerance)
{
	EXPECT_EQ(to_ticks(0.10), 10);
	EXPECT_EQ(to_ticks(2.0), 200);
	EXPECT_EQ(to_ticks(0.0), 0);
	EXPECT_EQ(to_ticks(0.011), 2);
	EXPECT_EQ(to_ticks(0.7), 70);
}

TEST(Lifecycle, MotionRequiresReadyRig)
{
	RigState rig;
	EXPECT_THROW(move_relative(rig, {}, 1.0), RigError);
	EXPECT_THROW(initialise(rig), RigError);
	rig = power_on(rig);
	EXPECT_THROW(check(rig), RigError);
	rig = initialise(rig);
	EXPECT_THROW(move_global(rig, {}, 1.0), RigError);
	rig = check(rig);
	EXPECT_TRUE(rig.ready());
	EXPECT_NO_THROW(move_global(rig, {}, 1.0));
	NoiseSource rng(1);
	EXPECT_THROW(execute_poke(RigState{}, kPoking, 5.0, kThreshold, {}, {}, rng), RigError);
}

TEST(Motion, ZeroRelativeMoveOnlyAdvancesTime)
{
	const RigState rig = at_init();
	const RigState next = move_relative(rig, { 0, 0, 0 }, 2.0);
	EXPECT_EQ(next.effector_pose, rig.effector_pose);
	EXPECT_EQ(next.ticks, rig.ticks + 200);
}

TEST(Motion, SinglePinLateralFromInit)
{
	const RigState next = move_relative(at_init(), { 0.0, 0.024, 0.0 }, 2.0);
	expect_near_pose(next.effector_pose, { -0.1, 0.024, -0.075 });
}

TEST(Motion, RelativeMovesCompose)
{
	const Pose3 a{ 0.01, -0.02, 0.003 }, b{ -0.004, 0.05, -0.01 };
	const RigState two = move_relative(move_relative(at_init(), a, 1.0), b, 1.0);
	const RigState one = move_relative(at_init(), a + b, 2.0);
	expect_near_pose(two.effector_pose, one.effector_pose, 1e-15);
	EXPECT_EQ(two.ticks, one.ticks);
}

TEST(Motion, GlobalTargets)
{
	const RigState origin = move_global(at_init(), { 0, 0, 0 }, 2.0);
	EXPECT_EQ(origin.effector_pose, (Pose3{ 0, 0, 0 }));
	const RigState same = move_global(origin, origin.effector_pose, 0.5);
	EXPECT_EQ(same.effector_pose, origin.effector_pose);
	const RigState back = move_global(move_relative(origin, { 0.2, 0.1, -0.3 }, 1.0), kInit, 2.0);
	EXPECT_EQ(back.effector_pose, kInit);
}

TEST(Motion, WorkspaceBound)
{
	EXPECT_THROW(move_global(at_init(), { 0.6, 0, 0 }, 1.0), RigError);
	EXPECT_THROW(move_relative(at_init(), { 0, 0, -0.43 }, 1.0), RigError);
	EXPECT_NO_THROW(move_global(at_init(), { 0.5, -0.5, 0.5 }, 1.0));
	try {
		move_global(at_init(), { 0, std::nan(""), 0 }, 1.0);
		FAIL();
	}
	catch (const RigError& e) {
		EXPECT_EQ(e.kind(), RigError::Kind::Workspace);
	}
}

TEST(Motion, TimeNeverDecreases)
{
	RigState rig = at_init();
	std::int64_t last = rig.ticks;
	for (double d : { 0.0, 0.001, 0.5, 2.0 }) {
		rig = move_relative(rig, {}, d);
		EXPECT_GE(rig.ticks, last);
		last = rig.ticks;
	}
	const auto out = poke(rig, {}, 3);
	EXPECT_GE(out.state.ticks, last);
}

TEST(Stepper, Steps)
{
	EXPECT_DOUBLE_EQ(stepper_steps(0.001), 363.0);
	EXPECT_DOUBLE_EQ(stepper_steps(0.0), 0.0);
	EXPECT_DOUBLE_EQ(stepper_steps(0.002), 726.0);
	EXPECT_THROW(stepper_steps(-0.001), RigError);
	EXPECT_EQ(set_stepper(at_init(), 0.0013).stepper_separation, 0.0013);
	EXPECT_THROW(set_stepper(at_init(), -1.0), RigError);
}

TEST(Sensor, NoPenetrationNoForce)
{
	NoiseSource rng(5);
	const FtSample s = sample_ft(at_init(), quiet(), rng);
	for (double v : s.channels())
		EXPECT_EQ(v, 0.0);
	EXPECT_FALSE(s.touched);
}

TEST(Sensor, SpringLaw)
{
	const FingerModel finger = quiet();
	const RigState rig = move_global(at_init(), { -0.1, 0.0, finger.surface_height - 0.001 }, 1.0);
	NoiseSource rng(5);
	const FtSample s = sample_ft(rig, finger, rng);
	EXPECT_NEAR(s.fz, -0.5, 1e-12);
	EXPECT_EQ(s.fx, 0.0);
	EXPECT_EQ(s.tz, 0.0);

	// Beside the finger nothing is felt.
	const RigState aside = move_global(at_init(), { -0.1, 0.05, finger.surface_height - 0.001 }, 1.0);
	EXPECT_EQ(sample_ft(aside, finger, rng).fz, 0.0);
}

TEST(Sensor, SeededStreamsRepeat)
{
	NoiseSource a(99), b(99);
	const RigState rig = at_init();
	for (int i = 0; i < 50; ++i) {
		const auto sa = sample_ft(rig, FingerModel{}, a);
		const auto sb = sample_ft(rig, FingerModel{}, b);
		EXPECT_EQ(sa.channels(), sb.channels());
	}
}

TEST(Contact, AnyChannelInclusive)
{
	FtSample s;
	EXPECT_FALSE(detect_contact(s, kThreshold));
	s.fz = -0.30;
	EXPECT_TRUE(detect_contact(s, kThreshold));
	s = {};
	s.fx = 0.5;
	EXPECT_TRUE(detect_contact(s, kThreshold));
	s = {};
	s.tz = -0.1;
	EXPECT_TRUE(detect_contact(s, kThreshold));
	s = {};
	s.fz = -0.2499;
	s.tx = 0.0999;
	EXPECT_FALSE(detect_contact(s, kThreshold));
}

TEST(Poke, DefaultFingerStopsInFirstCentimetre)
{
	const RigState rig = at_init();
	const FingerModel finger;
	const auto out = poke(rig, finger, 11);
	const auto& r = out.result;
	EXPECT_TRUE(r.stopped_on_contact);
	EXPECT_TRUE(r.recording.touched);
	ASSERT_EQ(r.recording.samples.size(), 10u);
	for (const auto& s : r.recording.samples)
		EXPECT_TRUE(s.touched);

	// The surface lies 1 cm below the start; the threshold needs v3/stiffness of penetration, and the
	// sensor is polled once per 0.10 s of a 5 s, 2 cm descent.
	const double travel = rig.effector_pose.v3 - r.stop_pose.v3;
	const double poll_step = 0.02 * 0.10 / 5.0;
	EXPECT_LE(travel, 0.01 + 0.25 / finger.stiffness + poll_step + 1e-12);
	EXPECT_GT(travel, 0.0);
	EXPECT_EQ(out.state.effector_pose, r.stop_pose);
}

TEST(Poke, AbsentFingerRunsFullTravel)
{
	const RigState rig = at_init();
	const auto out = poke(rig, FingerModel::absent(), 11);
	const auto& r = out.result;
	EXPECT_FALSE(r.stopped_on_contact);
	EXPECT_FALSE(r.recording.touched);
	ASSERT_EQ(r.recording.samples.size(), 10u);
	for (const auto& s : r.recording.samples)
		EXPECT_FALSE(s.touched);
	EXPECT_NEAR(rig.effector_pose.v3 - r.stop_pose.v3, 0.02, 1e-12);
	EXPECT_EQ(r.motion_samples.size(), 50u);
}

TEST(Poke, ZeroVectorStillRecords)
{
	const auto out = poke(at_init(), FingerModel{}, 4, { 0, 0, 0 });
	EXPECT_FALSE(out.result.stopped_on_contact);
	EXPECT_EQ(out.result.stop_pose, kInit);
	EXPECT_EQ(out.result.recording.samples.size(), 10u);
}

TEST(Poke, StopConditionOnlyAtLastMotionSample)
{
	for (std::uint64_t seed = 0; seed < 200; ++seed) {
		FingerModel finger;
		finger.surface_height = -0.075 - 0.0005 * static_cast<double>(seed % 40);
		finger.noise_std_force = 0.05;
		const auto r = poke(at_init(), finger, seed).result;
		ASSERT_FALSE(r.motion_samples.empty());
		for (size_t i = 0; i + 1 < r.motion_samples.size(); ++i)
			ASSERT_FALSE(detect_contact(r.motion_samples[i], kThreshold)) << seed << " " << i;
		EXPECT_EQ(detect_contact(r.motion_samples.back(), kThreshold), r.stopped_on_contact) << seed;
		EXPECT_EQ(r.recording.touched, r.stopped_on_contact);
	}
}

TEST(Poke, RecordingCadence)
{
	for (double wait : { 0.10, 0.05, 0.013, 0.25 }) {
		for (int count : { 1, 3, 10 }) {
			NoiseSource rng(static_cast<std::uint64_t>(count * 1000 + wait * 1000));
			const RigState rig = at_init();
			const auto r = execute_poke(rig, kPoking, 5.0, kThreshold, FingerModel{}, PokeParams{ wait, count }, rng).result;
			ASSERT_EQ(r.recording.samples.size(), static_cast<size_t>(count));
			const double stop_time = r.motion_samples.back().timestamp;
			EXPECT_NEAR(r.recording.samples.front().timestamp - stop_time, wait, kClockQuantum + 1e-9);
			for (size_t i = 1; i < r.recording.samples.size(); ++i)
				EXPECT_NEAR(r.recording.samples[i].timestamp - r.recording.samples[i - 1].timestamp, wait,
					kClockQuantum + 1e-9);
		}
	}
}

TEST(Poke, Deterministic)
{
	const auto a = poke(at_init(), FingerModel{}, 1234);
	const auto b = poke(at_init(), FingerModel{}, 1234);
	EXPECT_EQ(a.state, b.state);
	ASSERT_EQ(a.result.recording.samples.size(), b.result.recording.samples.size());
	for (size_t i = 0; i < a.result.recording.samples.size(); ++i) {
		EXPECT_EQ(a.result.recording.samples[i].timestamp, b.result.recording.samples[i].timestamp);
		EXPECT_EQ(a.result.recording.samples[i].channels(), b.result.recording.samples[i].channels());
	}
}

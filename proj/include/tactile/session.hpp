#pragma once

#include <tactile/config.hpp>
#include <tactile/records.hpp>
#include <tactile/rig_sim.hpp>
#include <tactile/scheduler.hpp>

#include <cstdint>
#include <functional>
#include <optional>
#include <string>
#include <variant>
#include <vector>

namespace tactile {

enum class Phase {
	AwaitDebugChoice,
	Intake,
	AwaitInitConfirm,
	MovingToInit,
	AwaitStepperMove,
	Presenting,
	AwaitResponse,
	TrialComplete,
	SessionComplete,
	Cancelled,
};

enum class IntakeField { Id, Name, Surname, Age, Gender, Notes };
enum class Slot { First, Second };
enum class Side { SinglePin, TwoPins };

std::string_view to_string(Phase phase);
std::string_view to_string(IntakeField field);

bool is_terminal(Phase phase);

// Operator events.
struct Confirm { bool yes = true; };
struct TextInput { std::string text; };
enum class Option { First, Second, Female, Male };
struct SelectOption { Option option; };
struct Escape {};

using OperatorEvent = std::variant<Confirm, TextInput, SelectOption, Escape>;

std::string_view to_string(Option option);
std::optional<Option> parse_option(std::string_view text);

// Console wording. These strings are the operator contract.
namespace prompts {
inline constexpr std::string_view kDebugMode = "Debug mode: YES (Continue Y/N)";
inline constexpr std::string_view kEnterId = "Enter unique ID: ";
inline constexpr std::string_view kEnterName = "Enter participant name: ";
inline constexpr std::string_view kEnterSurname = "Enter participant surname: ";
inline constexpr std::string_view kEnterAge = "Enter participant age: ";
inline constexpr std::string_view kGenderFemale = "Gender: Female";
inline constexpr std::string_view kEnterNotes = "Enter participant notes: ";
inline constexpr std::string_view kInitPose = "[DEMO]: moving to init pose (Continue Y/N)";
inline constexpr std::string_view kMovingToInit = "[DEMO]: moving to init pose";
inline constexpr std::string_view kNoStepperPoses = "No poses for the stepper motor";
inline constexpr std::string_view kResponse = "[Demo] Response: First";
inline constexpr std::string_view kPresentingFirst = "[DEMO]: first presentation";
inline constexpr std::string_view kPresentingSecond = "[DEMO]: second presentation";
inline constexpr std::string_view kTrialComplete = "[DEMO]: trial complete";
inline constexpr std::string_view kSessionComplete = "[DEMO]: experiment completed";
inline constexpr std::string_view kCancelled = "[DEMO]: demo cancelled";
} // namespace prompts

/// "[DEMO]: move stepper motor to {mm:.1f} [mm] {steps:.2f} [step]"
std::string stepper_prompt(double distance_m);
/// "[DEMO] {Training|Trial} {i}/{n} presentation: {Single Pin First|Two Pins First}"
std::string trial_announcement(const TrialPlan& plan, int total_in_group);
/// "FT [touched=TRUE] [timestamp] [fx] [fy] [fz] [tx] [ty] [tz]"
std::string ft_line(const FtSample& sample);
/// "[DEMO] distance 1.0 [mm]: presented 3/10, available"
std::string quota_line(double distance_m, int presented, int per_distance);

struct PresentationResult
{
	RigState rig;
	FtRecording recording;
	Pose3 lateral_target; // effector pose after the horizontal alignment move
	PokeResult poke;
};

/// Horizontal alignment move for one presentation. The two-pin move is shifted by -0.5 * distance
/// along y so that the pair straddles the finger centre.
Pose3 presentation_motion(const TouchParams& touch, Side side, double distance);

/// Lateral alignment, poke, and return to the home pose.
PresentationResult run_presentation(const RigState& rig, const TouchParams& touch, const ExperimentParams& experiment,
	Side side, double distance, const FingerModel& finger, NoiseSource& rng);

// Output emitted by a transition, in order.
enum class Channel { Info, Operator };

struct PhaseChanged { Phase phase; std::string prompt; };
struct ConsoleLine { Channel channel; std::string text; };
struct FtReading { Slot slot; FtSample sample; bool in_motion = false; };
struct TrialCompleted { TrialRecord record; };
struct SessionEnded { bool completed = false; std::string reason; };

using SessionEvent = std::variant<PhaseChanged, ConsoleLine, FtReading, TrialCompleted, SessionEnded>;

struct SessionState
{
	DemoConfig config;
	FingerModel finger;
	std::uint64_t seed = 0;
	RigState rig;
	std::optional<Scheduler> scheduler;
	Phase phase = Phase::AwaitDebugChoice;
	IntakeField intake_field = IntakeField::Id;
	Slot slot = Slot::First;
	Participant participant; // complete once intake is over
	bool participant_complete = false;
	bool debug_mode = false;
	std::optional<TrialPlan> current;
	std::optional<FtRecording> ft_first;
	std::optional<FtRecording> ft_second;
	std::vector<TrialRecord> records;
	std::string prompt;
	std::string cancel_reason;
	NoiseSource noise;
	/// Plans already completed before a resume; replayed into the scheduler when it is built.
	std::vector<TrialPlan> resume_history;
};

/// Called once per completed trial, before the session moves on.
using TrialSink = std::function<void(const TrialRecord&)>;

/// The demo as an explicit state machine. Transient phases (moving to init, presenting,
/// trial complete) run inside submit(); the returned events record each of them.
class Session
{
public:
	/// Starts at AwaitDebugChoice. Brings the simulated rig up (power, initialise, check).
	Session(DemoConfig config, FingerModel finger, std::uint64_t seed, TrialSink sink = {});

	/// Continues an interrupted session: intake is skipped and the scheduler is fast-forwarded
	/// past `completed` once the operator confirms the init pose.
	static Session resume(DemoConfig config, FingerModel finger, std::uint64_t seed, Participant participant,
		bool debug_mode, std::vector<TrialRecord> completed, TrialSink sink = {});

	/// Applies one operator event. Throws PhaseError (event not legal now) or InputError
	/// (invalid intake text); in both cases the state is unchanged.
	std::vector<SessionEvent> submit(const OperatorEvent& event);

	const SessionState& state() const { return state_; }
	Phase phase() const { return state_.phase; }
	const std::string& prompt() const { return state_.prompt; }
	/// Events describing the initial phase (for a freshly connected display).
	std::vector<SessionEvent> initial_events() const;

	int total_trials() const;

private:
	void enter(Phase phase, std::string prompt, std::vector<SessionEvent>& out);
	void cancel(std::string reason, std::vector<SessionEvent>& out);
	void handle_intake(const OperatorEvent& event, std::vector<SessionEvent>& out);
	void move_to_init(std::vector<SessionEvent>& out);
	void begin_next_trial(std::vector<SessionEvent>& out);
	void present_both(std::vector<SessionEvent>& out);
	void complete_trial(Response response, std::vector<SessionEvent>& out);

	SessionState state_;
	TrialSink sink_;
};

std::string_view intake_prompt(IntakeField field);

} // namespace tactile

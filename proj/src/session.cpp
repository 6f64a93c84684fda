#include <tactile/session.hpp>

#include <tactile/error.hpp>

#include <fmt/format.h>

#include <charconv>

namespace tactile {

namespace {

constexpr std::uint64_t kNoiseSeedSalt = 0x9E3779B97F4A7C15ull;

template <class... Ts>
struct overloaded : Ts...
{
	using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

std::string_view event_name(const OperatorEvent& event)
{
	return std::visit(overloaded{
		[](const Confirm& c) -> std::string_view { return c.yes ? "Confirm(Y)" : "Confirm(N)"; },
		[](const TextInput&) -> std::string_view { return "TextInput"; },
		[](const SelectOption&) -> std::string_view { return "SelectOption"; },
		[](const Escape&) -> std::string_view { return "Escape"; } }, event);
}

[[noreturn]] void reject(const SessionState& state, const OperatorEvent& event, std::string_view hint = {})
{
	throw PhaseError(fmt::format("{} is not accepted in phase {}{}{}", event_name(event), to_string(state.phase),
		hint.empty() ? "" : ": ", hint));
}

void require_printable(std::string_view text, std::string_view what)
{
	for (unsigned char c : text)
		if (c < 0x20 || c == 0x7f)
			throw InputError(fmt::format("{} contains a control character", what));
}

void require_path_safe(std::string_view text, std::string_view what)
{
	if (text.empty())
		throw InputError(fmt::format("{} must not be empty", what));
	if (text == "." || text == ".." || text.find_first_of("/\\") != std::string_view::npos)
		throw InputError(fmt::format("{} cannot be used in a file name", what));
}

} // namespace

std::string_view to_string(Phase phase)
{
	switch (phase) {
	case Phase::AwaitDebugChoice: return "AwaitDebugChoice";
	case Phase::Intake: return "Intake";
	case Phase::AwaitInitConfirm: return "AwaitInitConfirm";
	case Phase::MovingToInit: return "MovingToInit";
	case Phase::AwaitStepperMove: return "AwaitStepperMove";
	case Phase::Presenting: return "Presenting";
	case Phase::AwaitResponse: return "AwaitResponse";
	case Phase::TrialComplete: return "TrialComplete";
	case Phase::SessionComplete: return "SessionComplete";
	case Phase::Cancelled: return "Cancelled";
	}
	return "?";
}

std::string_view to_string(IntakeField field)
{
	switch (field) {
	case IntakeField::Id: return "id";
	case IntakeField::Name: return "name";
	case IntakeField::Surname: return "surname";
	case IntakeField::Age: return "age";
	case IntakeField::Gender: return "gender";
	case IntakeField::Notes: return "notes";
	}
	return "?";
}

std::string_view to_string(Option option)
{
	switch (option) {
	case Option::First: return "First";
	case Option::Second: return "Second";
	case Option::Female: return "Female";
	case Option::Male: return "Male";
	}
	return "?";
}

std::optional<Option> parse_option(std::string_view text)
{
	for (auto o : { Option::First, Option::Second, Option::Female, Option::Male })
		if (to_string(o) == text)
			return o;
	return std::nullopt;
}

bool is_terminal(Phase phase) { return phase == Phase::SessionComplete || phase == Phase::Cancelled; }

std::string_view intake_prompt(IntakeField field)
{
	switch (field) {
	case IntakeField::Id: return prompts::kEnterId;
	case IntakeField::Name: return prompts::kEnterName;
	case IntakeField::Surname: return prompts::kEnterSurname;
	case IntakeField::Age: return prompts::kEnterAge;
	case IntakeField::Gender: return prompts::kGenderFemale;
	case IntakeField::Notes: return prompts::kEnterNotes;
	}
	return {};
}

std::string stepper_prompt(double distance_m)
{
	const double steps = stepper_steps(distance_m);
	return fmt::format("[DEMO]: move stepper motor to {:.1f} [mm] {:.2f} [step]", distance_m * 1000.0, steps);
}

std::string trial_announcement(const TrialPlan& plan, int total_in_group)
{
	return fmt::format("[DEMO] {} {}/{} presentation: {}", to_string(plan.label), plan.index, total_in_group,
		plan.presentation == Presentation::SinglePinFirst ? "Single Pin First" : "Two Pins First");
}

std::string ft_line(const FtSample& s)
{
	return fmt::format("FT [touched={}] [{:.3f}] [{:.6f}] [{:.6f}] [{:.6f}] [{:.6f}] [{:.6f}] [{:.6f}]",
		s.touched ? "TRUE" : "FALSE", s.timestamp, s.fx, s.fy, s.fz, s.tx, s.ty, s.tz);
}

std::string quota_line(double distance_m, int presented, int per_distance)
{
	return fmt::format("[DEMO] distance {:.1f} [mm]: presented {}/{}, {}", distance_m * 1000.0, presented,
		per_distance, presented < per_distance ? "available" : "exhausted");
}

Pose3 presentation_motion(const TouchParams& touch, Side side, double distance)
{
	if (side == Side::SinglePin)
		return touch.motion_single_pin;
	Pose3 motion = touch.motion_two_pins;
	motion.v2 += -0.5 * distance;
	return motion;
}

PresentationResult run_presentation(const RigState& rig, const TouchParams& touch, const ExperimentParams& experiment,
	Side side, double distance, const FingerModel& finger, NoiseSource& rng)
{
	PresentationResult out;
	out.rig = move_relative(rig, presentation_motion(touch, side, distance), touch.movement_duration);
	out.lateral_target = out.rig.effector_pose;

	const PokeParams params{ touch.event_time_wait, experiment.number_ftdata_recordings };
	auto poke = execute_poke(out.rig, touch.poking, touch.poking_duration, touch.threshold, finger, params, rng);
	out.rig = move_global(poke.state, touch.init, touch.movement_duration);
	out.recording = canonical(poke.result.recording);
	out.poke = std::move(poke.result);
	return out;
}

Session::Session(DemoConfig config, FingerModel finger, std::uint64_t seed, TrialSink sink) : sink_(std::move(sink))
{
	state_.config = std::move(config);
	state_.finger = finger;
	state_.seed = seed;
	state_.rig = bring_up();
	state_.noise.seed(seed ^ kNoiseSeedSalt);
	state_.phase = Phase::AwaitDebugChoice;
	state_.prompt = std::string(prompts::kDebugMode);
}

Session Session::resume(DemoConfig config, FingerModel finger, std::uint64_t seed, Participant participant,
	bool debug_mode, std::vector<TrialRecord> completed, TrialSink sink)
{
	Session s(std::move(config), finger, seed, std::move(sink));
	s.state_.participant = std::move(participant);
	s.state_.participant_complete = true;
	s.state_.debug_mode = debug_mode;
	for (const auto& r : completed) {
		TrialPlan plan;
		plan.label = r.label;
		plan.sequence = r.trial_no;
		plan.distance = r.distance;
		plan.presentation = r.presentation;
		s.state_.resume_history.push_back(plan);
	}
	// Fresh noise stream for the continuation; the original one is not recoverable from disk.
	s.state_.noise.seed((seed ^ kNoiseSeedSalt) + completed.size());
	s.state_.records = std::move(completed);
	s.state_.phase = Phase::AwaitInitConfirm;
	s.state_.prompt = std::string(prompts::kInitPose);
	return s;
}

int Session::total_trials() const
{
	if (state_.scheduler)
		return state_.scheduler->total_trials();
	const auto& x = state_.config.experiment;
	return x.number_training_trials + x.number_presentations * static_cast<int>(state_.config.smposes.size());
}

std::vector<SessionEvent> Session::initial_events() const
{
	return { PhaseChanged{ state_.phase, state_.prompt } };
}

void Session::enter(Phase phase, std::string prompt, std::vector<SessionEvent>& out)
{
	state_.phase = phase;
	state_.prompt = std::move(prompt);
	out.push_back(PhaseChanged{ phase, state_.prompt });
}

void Session::cancel(std::string reason, std::vector<SessionEvent>& out)
{
	state_.cancel_reason = reason;
	state_.current.reset();
	state_.ft_first.reset();
	state_.ft_second.reset();
	if (reason == prompts::kNoStepperPoses)
		out.push_back(ConsoleLine{ Channel::Info, reason });
	enter(Phase::Cancelled, std::string(prompts::kCancelled), out);
	out.push_back(SessionEnded{ false, std::move(reason) });
}

std::vector<SessionEvent> Session::submit(const OperatorEvent& event)
{
	// Work on a copy so that a rejected event leaves the session untouched.
	Session next = *this;
	std::vector<SessionEvent> out;
	auto& st = next.state_;

	if (is_terminal(st.phase))
		reject(st, event, "the session has ended");

	if (std::holds_alternative<Escape>(event)) {
		next.cancel("cancelled", out);
		*this = std::move(next);
		return out;
	}

	switch (st.phase) {
	case Phase::AwaitDebugChoice: {
		const auto* c = std::get_if<Confirm>(&event);
		if (!c)
			reject(st, event, "press Y or N");
		st.debug_mode = c->yes;
		st.intake_field = IntakeField::Id;
		next.enter(Phase::Intake, std::string(prompts::kEnterId), out);
		break;
	}
	case Phase::Intake:
		next.handle_intake(event, out);
		break;
	case Phase::AwaitInitConfirm: {
		const auto* c = std::get_if<Confirm>(&event);
		if (!c)
			reject(st, event, "press Y or N");
		if (!c->yes)
			next.cancel("cancelled", out);
		else
			next.move_to_init(out);
		break;
	}
	case Phase::AwaitStepperMove: {
		const auto* c = std::get_if<Confirm>(&event);
		if (!c || !c->yes)
			reject(st, event, "the break-point waits for Y");
		st.rig = set_stepper(st.rig, st.current->distance);
		next.present_both(out);
		break;
	}
	case Phase::AwaitResponse: {
		const auto* sel = std::get_if<SelectOption>(&event);
		if (!sel)
			reject(st, event, "Typing is not allowed");
		if (sel->option != Option::First && sel->option != Option::Second)
			reject(st, event, "the options are First and Second");
		next.complete_trial(sel->option == Option::First ? Response::First : Response::Second, out);
		break;
	}
	default:
		reject(st, event);
	}

	*this = std::move(next);
	return out;
}

void Session::handle_intake(const OperatorEvent& event, std::vector<SessionEvent>& out)
{
	auto& st = state_;
	auto& p = st.participant;

	if (st.intake_field == IntakeField::Gender) {
		const auto* sel = std::get_if<SelectOption>(&event);
		if (!sel || (sel->option != Option::Female && sel->option != Option::Male))
			reject(st, event, "gender is selected from FEMALE or MALE only");
		p.gender = sel->option == Option::Female ? Gender::Female : Gender::Male;
		st.intake_field = IntakeField::Notes;
		enter(Phase::Intake, std::string(prompts::kEnterNotes), out);
		return;
	}

	const auto* input = std::get_if<TextInput>(&event);
	if (!input)
		reject(st, event, fmt::format("expecting text for {}", to_string(st.intake_field)));
	const std::string& text = input->text;
	require_printable(text, to_string(st.intake_field));

	switch (st.intake_field) {
	case IntakeField::Id:
		require_path_safe(text, "participant id");
		p.id = text;
		st.intake_field = IntakeField::Name;
		break;
	case IntakeField::Name:
		if (text.empty())
			throw InputError("participant name must not be empty");
		p.name = text;
		st.intake_field = IntakeField::Surname;
		break;
	case IntakeField::Surname:
		require_path_safe(text, "participant surname");
		p.surname = text;
		st.intake_field = IntakeField::Age;
		break;
	case IntakeField::Age: {
		int age = 0;
		auto [ptr, ec] = std::from_chars(text.data(), text.data() + text.size(), age);
		if (ec != std::errc() || ptr != text.data() + text.size() || text.empty())
			throw InputError(fmt::format("age '{}' is not a whole number", text));
		if (age < kMinAge || age > kMaxAge)
			throw InputError(fmt::format("age {} outside [{}, {}]", age, kMinAge, kMaxAge));
		p.age = age;
		p.gender = Gender::Female;
		st.intake_field = IntakeField::Gender;
		break;
	}
	case IntakeField::Notes:
		p.notes = text;
		st.participant_complete = true;
		enter(Phase::AwaitInitConfirm, std::string(prompts::kInitPose), out);
		return;
	case IntakeField::Gender:
		break;
	}
	enter(Phase::Intake, std::string(intake_prompt(st.intake_field)), out);
}

void Session::move_to_init(std::vector<SessionEvent>& out)
{
	auto& st = state_;
	enter(Phase::MovingToInit, std::string(prompts::kMovingToInit), out);
	st.rig = move_global(st.rig, st.config.touch.init, st.config.touch.movement_duration);

	try {
		st.scheduler = Scheduler::build(st.config.experiment, st.config.distances(), st.seed);
		st.scheduler->fast_forward(st.resume_history);
	}
	catch (const SchedulerError& e) {
		cancel(e.what(), out);
		return;
	}
	st.resume_history.clear();
	begin_next_trial(out);
}

void Session::begin_next_trial(std::vector<SessionEvent>& out)
{
	auto& st = state_;
	auto plan = st.scheduler->next();
	if (!plan) {
		st.current.reset();
		enter(Phase::SessionComplete, std::string(prompts::kSessionComplete), out);
		out.push_back(SessionEnded{ true, "complete" });
		return;
	}
	st.current = plan;
	st.ft_first.reset();

	const auto& sched = *st.scheduler;
	const int group = plan->label == TrialLabel::Training ? sched.training_trials() : sched.real_trials();
	out.push_back(ConsoleLine{ Channel::Info, trial_announcement(*plan, group) });
	for (size_t i = 0; i < sched.distances().size(); ++i) {
		const int per = sched.presentations_per_distance();
		out.push_back(ConsoleLine{ Channel::Info,
			quota_line(sched.distances()[i], per - sched.remaining_quota()[i], per) });
	}

	if (st.debug_mode || plan->distance != st.rig.stepper_separation) {
		// Outside debug mode the simulated stepper is driven directly; the pause remains for safety.
		if (!st.debug_mode)
			st.rig = set_stepper(st.rig, plan->distance);
		enter(Phase::AwaitStepperMove, stepper_prompt(plan->distance), out);
		return;
	}
	present_both(out);
}

void Session::present_both(std::vector<SessionEvent>& out)
{
	auto& st = state_;
	const TrialPlan& plan = *st.current;
	const Side first = plan.presentation == Presentation::TwoPinsFirst ? Side::TwoPins : Side::SinglePin;
	const Side second = first == Side::TwoPins ? Side::SinglePin : Side::TwoPins;

	for (Slot slot : { Slot::First, Slot::Second }) {
		st.slot = slot;
		enter(Phase::Presenting, std::string(slot == Slot::First ? prompts::kPresentingFirst : prompts::kPresentingSecond),
			out);
		auto result = run_presentation(st.rig, st.config.touch, st.config.experiment,
			slot == Slot::First ? first : second, plan.distance, st.finger, st.noise);
		st.rig = result.rig;
		for (const auto& s : result.poke.motion_samples)
			out.push_back(FtReading{ slot, s, true });
		for (const auto& s : result.recording.samples) {
			out.push_back(FtReading{ slot, s, false });
			out.push_back(ConsoleLine{ Channel::Info, ft_line(s) });
		}
		(slot == Slot::First ? st.ft_first : st.ft_second) = std::move(result.recording);
	}
	enter(Phase::AwaitResponse, std::string(prompts::kResponse), out);
}

void Session::complete_trial(Response response, std::vector<SessionEvent>& out)
{
	auto& st = state_;
	const TrialPlan& plan = *st.current;
	TrialRecord record;
	record.participant_id = st.participant.id;
	record.trial_no = plan.sequence;
	record.label = plan.label;
	record.presentation = plan.presentation;
	record.ft_first = std::move(*st.ft_first);
	record.ft_second = std::move(*st.ft_second);
	record.distance = round_to_decimals(plan.distance, kValueDecimals);
	record.response = response;
	record.correct = evaluate_response(plan, response);
	st.ft_first.reset();
	st.ft_second.reset();

	out.push_back(ConsoleLine{ Channel::Operator,
		fmt::format("[DEMO] Response: {} is {}", to_string(response), record.correct ? "correct" : "wrong") });
	if (sink_)
		sink_(record);
	st.records.push_back(record);
	out.push_back(TrialCompleted{ std::move(record) });
	enter(Phase::TrialComplete, std::string(prompts::kTrialComplete), out);
	begin_next_trial(out);
}

} // namespace tactile

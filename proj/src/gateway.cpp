#include <tactile/gateway.hpp>

#include <fmt/format.h>

namespace tactile {

using nlohmann::json;

namespace {

template <class... Ts>
struct overloaded : Ts...
{
	using Ts::operator()...;
};
template <class... Ts>
overloaded(Ts...) -> overloaded<Ts...>;

json sample_json(const FtSample& s)
{
	return { { "touched", s.touched }, { "timestamp", s.timestamp }, { "fx", s.fx }, { "fy", s.fy }, { "fz", s.fz },
		{ "tx", s.tx }, { "ty", s.ty }, { "tz", s.tz } };
}

} // namespace

Gateway::Gateway(SessionRunner& runner) : runner_(runner) {}

WireEvent Gateway::make(EventKind kind, json payload) { return WireEvent{ kind, ++seq_, std::move(payload) }; }

WireEvent Gateway::error_event(std::string_view code, std::string_view message, std::string_view request_id)
{
	json payload{ { "code", code }, { "message", message } };
	if (!request_id.empty())
		payload["request_id"] = request_id;
	return make(EventKind::Error, std::move(payload));
}

json Gateway::snapshot_payload() const
{
	const Session& session = runner_.session();
	const SessionState& st = session.state();

	json j;
	j["phase"] = to_string(st.phase);
	j["prompt"] = st.prompt;
	j["debug_mode"] = st.debug_mode;
	j["intake_field"] = st.phase == Phase::Intake ? json(to_string(st.intake_field)) : json(nullptr);
	j["participant_id"] = st.participant.id.empty() ? json(nullptr) : json(st.participant.id);
	j["completed_trials"] = st.records.size();
	j["total_trials"] = session.total_trials();
	j["finished"] = is_terminal(st.phase);
	j["cancel_reason"] = st.cancel_reason;

	json options = json::array();
	if (st.phase == Phase::AwaitResponse)
		options = { "First", "Second" };
	else if (st.phase == Phase::Intake && st.intake_field == IntakeField::Gender)
		options = { "Female", "Male" };
	j["options"] = options;
	j["response_enabled"] = st.phase == Phase::AwaitResponse;

	if (st.current) {
		const auto& plan = *st.current;
		const auto& sched = *st.scheduler;
		j["trial"] = { { "label", to_string(plan.label) }, { "index", plan.index },
			{ "group_total", plan.label == TrialLabel::Training ? sched.training_trials() : sched.real_trials() },
			{ "sequence", plan.sequence }, { "distance_m", plan.distance },
			{ "presentation", to_string(plan.presentation) } };
	}
	else
		j["trial"] = nullptr;

	if (st.phase == Phase::AwaitStepperMove && st.current)
		j["stepper"] = { { "distance_m", st.current->distance }, { "mm", st.current->distance * 1000.0 },
			{ "steps", stepper_steps(st.current->distance) } };
	else
		j["stepper"] = nullptr;

	j["quotas"] = json::array();
	if (st.scheduler)
		for (size_t i = 0; i < st.scheduler->distances().size(); ++i)
			j["quotas"].push_back({ { "distance_m", st.scheduler->distances()[i] },
				{ "remaining", st.scheduler->remaining_quota()[i] },
				{ "per_distance", st.scheduler->presentations_per_distance() } });

	const auto& p = st.rig.effector_pose;
	j["rig"] = { { "pose", { p.v1, p.v2, p.v3 } }, { "sim_time", st.rig.sim_time() },
		{ "stepper_separation", st.rig.stepper_separation } };
	const auto& th = st.config.touch.threshold;
	j["threshold"] = { { "v1", th.v1 }, { "v2", th.v2 }, { "v3", th.v3 }, { "w1", th.w1 }, { "w2", th.w2 },
		{ "w3", th.w3 } };
	return j;
}

std::vector<WireEvent> Gateway::connect() { return { make(EventKind::Snapshot, snapshot_payload()) }; }

void Gateway::translate(const std::vector<SessionEvent>& events, std::vector<WireEvent>& out)
{
	for (const auto& event : events) {
		std::visit(overloaded{
			[&](const PhaseChanged& e) {
				out.push_back(make(EventKind::Prompt, { { "phase", to_string(e.phase) }, { "prompt", e.prompt } }));
			},
			[&](const ConsoleLine& e) {
				out.push_back(make(EventKind::Prompt,
					{ { "phase", nullptr }, { "line", e.text },
						{ "channel", e.channel == Channel::Operator ? "operator" : "info" } }));
			},
			[&](const FtReading& e) {
				if (last_ft_time_ >= 0.0 && e.sample.timestamp < last_ft_time_ + kFtLivePeriod - 1e-9)
					return;
				last_ft_time_ = e.sample.timestamp;
				json payload = sample_json(e.sample);
				payload["slot"] = e.slot == Slot::First ? "first" : "second";
				payload["in_motion"] = e.in_motion;
				out.push_back(make(EventKind::FtLive, std::move(payload)));
			},
			[&](const TrialCompleted& e) {
				const auto& r = e.record;
				out.push_back(make(EventKind::TrialResult,
					{ { "trial_no", r.trial_no }, { "label", to_string(r.label) }, { "distance_m", r.distance },
						{ "presentation", to_string(r.presentation) }, { "response", to_string(r.response) },
						{ "correct", r.correct }, { "touched_first", r.ft_first.touched },
						{ "touched_second", r.ft_second.touched } }));
			},
			[&](const SessionEnded& e) {
				json payload{ { "reason", e.completed ? "complete" : "cancelled" }, { "message", e.reason },
					{ "completed_trials", runner_.session().state().records.size() } };
				if (const auto& archive = runner_.archive())
					payload["archive_dir"] = archive->paths.dir.string();
				out.push_back(make(EventKind::SessionEnd, std::move(payload)));
			} }, event);
	}
}

std::vector<WireEvent> Gateway::handle_frame(std::string_view frame)
{
	while (!frame.empty() && (frame.back() == '\r' || frame.back() == '\n'))
		frame.remove_suffix(1);

	std::vector<WireEvent> out;
	WireCommand command;
	try {
		command = decode_command(frame);
	}
	catch (const WireError& e) {
		out.push_back(error_event("malformed", e.what()));
		return out;
	}

	if (const auto it = acks_.find(command.request_id); it != acks_.end()) {
		json payload = it->second;
		payload["duplicate"] = true;
		out.push_back(make(EventKind::Ack, std::move(payload)));
		return out;
	}

	const auto outcome = runner_.apply(command);
	if (!outcome.accepted) {
		out.push_back(make(EventKind::Ack, { { "request_id", command.request_id }, { "accepted", false } }));
		out.push_back(error_event(outcome.error_code, outcome.error, command.request_id));
		return out;
	}

	json ack{ { "request_id", command.request_id }, { "accepted", true } };
	acks_[command.request_id] = ack;
	out.push_back(make(EventKind::Ack, std::move(ack)));
	translate(outcome.events, out);
	out.push_back(make(EventKind::Snapshot, snapshot_payload()));
	return out;
}

} // namespace tactile

#include "test_support.hpp"

#include <tactile/gateway.hpp>
#include <tactile/persistence.hpp>

#include <gtest/gtest.h>

#include <algorithm>
#include <fstream>

using namespace tactile;
using namespace tactile::test;
using nlohmann::json;

namespace {

std::string frame(const OperatorEvent& e, const std::string& id) { return encode(to_wire_command(e, id)); }

std::vector<WireEvent> of_kind(const std::vector<WireEvent>& events, EventKind kind)
{
	std::vector<WireEvent> out;
	for (const auto& e : events)
		if (e.kind == kind)
			out.push_back(e);
	return out;
}

struct Fixture
{
	fs::path root;
	SessionRunner runner;
	Gateway gateway;
	std::vector<WireEvent> log;
	int next_id = 0;

	explicit Fixture(const std::string& name, DemoConfig cfg = young_config(), std::uint64_t seed = 1)
		: root(scratch_dir(name)), runner(std::move(cfg), options_for(seed, root)), gateway(runner)
	{
		record(gateway.connect());
	}

	std::vector<WireEvent> send(const OperatorEvent& e)
	{
		auto events = gateway.handle_frame(frame(e, "q" + std::to_string(++next_id)));
		record(events);
		return events;
	}

	void record(const std::vector<WireEvent>& events) { log.insert(log.end(), events.begin(), events.end()); }

	void run_to_end(int stop_after = -1)
	{
		send(Confirm{ false });
		for (const auto& t : { "P01", "Ada", "Lovelace", "30" })
			send(TextInput{ t });
		send(SelectOption{ Option::Female });
		send(TextInput{ "" });
		send(Confirm{ true });
		while (!gateway.finished()) {
			const auto& st = runner.session().state();
			if (stop_after >= 0 && static_cast<int>(st.records.size()) >= stop_after) {
				send(Escape{});
				break;
			}
			if (st.phase == Phase::AwaitStepperMove)
				send(Confirm{ true });
			else
				send(SelectOption{ Option::First });
		}
	}
};

} // namespace

TEST(Wire, CommandRoundTrip)
{
	const std::vector<OperatorEvent> events{ Confirm{ true }, Confirm{ false }, TextInput{ "a \"quoted\"\ntext" },
		SelectOption{ Option::Second }, SelectOption{ Option::Male }, Escape{} };
	for (const auto& e : events) {
		const auto c = to_wire_command(e, "id-1");
		const auto text = encode(c);
		ASSERT_EQ(text.back(), '\n');
		EXPECT_EQ(std::count(text.begin(), text.end(), '\n'), 1);
		const auto back = decode_command(text);
		EXPECT_EQ(back.kind, c.kind);
		EXPECT_EQ(back.request_id, "id-1");
		EXPECT_EQ(back.payload, c.payload);
		EXPECT_EQ(encode(to_wire_command(to_operator_event(back), "id-1")), text);
	}
}

TEST(Wire, EventRoundTrip)
{
	for (auto kind : { EventKind::Snapshot, EventKind::Prompt, EventKind::FtLive, EventKind::TrialResult,
			 EventKind::SessionEnd, EventKind::Error, EventKind::Ack }) {
		const WireEvent e{ kind, 42, { { "x", 1.5 }, { "s", "t" } } };
		const auto back = decode_event(encode(e));
		EXPECT_EQ(back.kind, kind);
		EXPECT_EQ(back.seq, 42u);
		EXPECT_EQ(back.payload, e.payload);
	}
	EXPECT_THROW(decode_event(R"({"kind":"bogus","seq":1,"payload":{}})"), WireError);
}

TEST(Wire, MalformedCommands)
{
	EXPECT_THROW(decode_command("not json"), WireError);
	EXPECT_THROW(decode_command("[1,2]"), WireError);
	EXPECT_THROW(decode_command(R"({"kind":"confirm","payload":{"yes":true}})"), WireError);
	EXPECT_THROW(decode_command(R"({"kind":"jump","request_id":"a","payload":{}})"), WireError);
	EXPECT_THROW(to_operator_event(decode_command(R"({"kind":"confirm","request_id":"a","payload":{}})")), WireError);
	EXPECT_THROW(to_operator_event(decode_command(R"({"kind":"select","request_id":"a","payload":{"option":"Third"}})")),
		WireError);
	EXPECT_NO_THROW(decode_command(R"({"kind":"escape","request_id":"a"})"));
}

TEST(Gateway, ConnectSendsSnapshot)
{
	Fixture f("gw_connect");
	ASSERT_EQ(f.log.size(), 1u);
	const auto& snap = f.log[0];
	EXPECT_EQ(snap.kind, EventKind::Snapshot);
	EXPECT_EQ(snap.seq, 1u);
	EXPECT_EQ(snap.payload["phase"], "AwaitDebugChoice");
	EXPECT_EQ(snap.payload["prompt"], "Debug mode: YES (Continue Y/N)");
	EXPECT_EQ(snap.payload["total_trials"], 71);
	EXPECT_EQ(snap.payload["response_enabled"], false);
}

TEST(Gateway, EscapeAtStartCancels)
{
	Fixture f("gw_escape_start");
	const auto out = f.send(Escape{});
	const auto ends = of_kind(out, EventKind::SessionEnd);
	ASSERT_EQ(ends.size(), 1u);
	EXPECT_EQ(ends[0].payload["reason"], "cancelled");
	EXPECT_EQ(ends[0].payload["completed_trials"], 0);
	EXPECT_TRUE(f.gateway.finished());
}

TEST(Gateway, DeclineAtInitConfirm)
{
	Fixture f("gw_init_no");
	f.send(Confirm{ false });
	for (const auto& t : { "P01", "Ada", "Lovelace", "30" })
		f.send(TextInput{ t });
	f.send(SelectOption{ Option::Female });
	f.send(TextInput{ "" });
	const auto out = f.send(Confirm{ false });
	const auto ends = of_kind(out, EventKind::SessionEnd);
	ASSERT_EQ(ends.size(), 1u);
	EXPECT_EQ(ends[0].payload["reason"], "cancelled");
	EXPECT_EQ(out.back().kind, EventKind::Snapshot);
	EXPECT_EQ(out.back().payload["phase"], "Cancelled");
	EXPECT_EQ(out.back().payload["finished"], true);
}

TEST(Gateway, DuplicateRequestIdReplaysAck)
{
	Fixture f("gw_dup");
	const auto text = frame(Confirm{ false }, "same");
	const auto first = f.gateway.handle_frame(text);
	ASSERT_EQ(first[0].kind, EventKind::Ack);
	EXPECT_EQ(first[0].payload["accepted"], true);
	EXPECT_EQ(f.runner.session().phase(), Phase::Intake);

	const auto again = f.gateway.handle_frame(text);
	ASSERT_EQ(again.size(), 1u);
	EXPECT_EQ(again[0].kind, EventKind::Ack);
	EXPECT_EQ(again[0].payload["request_id"], "same");
	EXPECT_EQ(again[0].payload["duplicate"], true);
	EXPECT_EQ(f.runner.session().phase(), Phase::Intake);
	EXPECT_EQ(f.runner.session().state().intake_field, IntakeField::Id);
}

TEST(Gateway, RejectedCommandAnswersAckAndError)
{
	Fixture f("gw_reject");
	const auto out = f.gateway.handle_frame(frame(TextInput{ "hello" }, "t1"));
	ASSERT_EQ(out.size(), 2u);
	EXPECT_EQ(out[0].kind, EventKind::Ack);
	EXPECT_EQ(out[0].payload["accepted"], false);
	EXPECT_EQ(out[1].kind, EventKind::Error);
	EXPECT_EQ(out[1].payload["request_id"], "t1");
	EXPECT_EQ(f.runner.session().phase(), Phase::AwaitDebugChoice);

	// A rejected id may be retried.
	const auto retry = f.gateway.handle_frame(frame(Confirm{ true }, "t1"));
	EXPECT_EQ(retry[0].payload["accepted"], true);
	EXPECT_FALSE(retry[0].payload.contains("duplicate"));
}

TEST(Gateway, MalformedFrame)
{
	Fixture f("gw_malformed");
	for (const std::string bad : { "{", "{}", R"({"kind":"fly","request_id":"x","payload":{}})", "" }) {
		const auto out = f.gateway.handle_frame(bad);
		ASSERT_EQ(out.size(), 1u) << bad;
		EXPECT_EQ(out[0].kind, EventKind::Error);
		EXPECT_EQ(out[0].payload["code"], "malformed");
	}
	EXPECT_EQ(f.runner.session().phase(), Phase::AwaitDebugChoice);
}

TEST(Gateway, FullSessionEventStream)
{
	Fixture f("gw_full");
	f.run_to_end();
	ASSERT_TRUE(f.gateway.finished());

	for (size_t i = 1; i < f.log.size(); ++i)
		ASSERT_EQ(f.log[i].seq, f.log[i - 1].seq + 1);

	const auto results = of_kind(f.log, EventKind::TrialResult);
	ASSERT_EQ(results.size(), 71u);
	EXPECT_EQ(results[0].payload["label"], "Training");
	for (size_t i = 0; i < results.size(); ++i)
		EXPECT_EQ(results[i].payload["trial_no"], i + 1);

	const auto live = of_kind(f.log, EventKind::FtLive);
	ASSERT_FALSE(live.empty());
	for (size_t i = 1; i < live.size(); ++i)
		EXPECT_GE(live[i].payload["timestamp"].get<double>() - live[i - 1].payload["timestamp"].get<double>(),
			Gateway::kFtLivePeriod - 1e-9);

	const auto ends = of_kind(f.log, EventKind::SessionEnd);
	ASSERT_EQ(ends.size(), 1u);
	EXPECT_EQ(ends[0].payload["reason"], "complete");
	EXPECT_EQ(ends[0].payload["completed_trials"], 71);
	EXPECT_TRUE(fs::exists(fs::path(ends[0].payload["archive_dir"].get<std::string>()) / "data.xml"));
}

TEST(Gateway, SnapshotReflectsStepperPause)
{
	Fixture f("gw_stepper");
	f.send(Confirm{ true });
	for (const auto& t : { "P02", "Bea", "Smith", "55" })
		f.send(TextInput{ t });
	f.send(SelectOption{ Option::Male });
	f.send(TextInput{ "" });
	const auto out = f.send(Confirm{ true });
	const auto& snap = out.back();
	ASSERT_EQ(snap.payload["phase"], "AwaitStepperMove");
	EXPECT_EQ(snap.payload["stepper"]["distance_m"], 0.002);
	EXPECT_DOUBLE_EQ(snap.payload["stepper"]["steps"].get<double>(), 726.0);
	EXPECT_EQ(snap.payload["trial"]["label"], "Training");
	EXPECT_EQ(snap.payload["participant_id"], "P02");
}

TEST(Gateway, EscapeMidSessionArchivesCompletedTrials)
{
	Fixture f("gw_escape");
	f.run_to_end(3);
	const auto ends = of_kind(f.log, EventKind::SessionEnd);
	ASSERT_EQ(ends.size(), 1u);
	EXPECT_EQ(ends[0].payload["reason"], "cancelled");
	EXPECT_EQ(ends[0].payload["completed_trials"], 3);
	const auto archive = read_archive(fs::path(ends[0].payload["archive_dir"].get<std::string>()));
	EXPECT_EQ(archive.trials.size(), 3u);
}

TEST(Script, EscapeAfterThreeTrials)
{
	const auto root = scratch_dir("script_escape");
	SessionRunner probe(young_config(), options_for(9, root / "probe"));
	const auto commands = drive(probe, false, always_first(), {}, 3);
	EXPECT_TRUE(std::holds_alternative<Escape>(to_operator_event(commands.back())));

	const auto archive = run_commands(young_config(), commands, options_for(9, root / "run"));
	EXPECT_EQ(archive.trials.size(), 3u);
	EXPECT_EQ(read_archive(archive.paths.dir).trials, archive.trials);
}

TEST(Script, MismatchNamesLineAndPhase)
{
	const auto dir = scratch_dir("script_bad");
	const auto script = dir / "bad.jsonl";
	{
		std::ofstream out(script);
		out << "# starts fine\n";
		out << encode(to_wire_command(Confirm{ true }, "a"));
		out << encode(to_wire_command(SelectOption{ Option::First }, "b"));
	}
	try {
		run_scripted(young_config_path(), script, 1, options_for(1, dir));
		FAIL();
	}
	catch (const ScriptError& e) {
		const std::string what = e.what();
		EXPECT_NE(what.find("line 3"), std::string::npos) << what;
		EXPECT_NE(what.find("Intake"), std::string::npos) << what;
	}

	const auto short_script = dir / "short.jsonl";
	{
		std::ofstream out(short_script);
		out << encode(to_wire_command(Confirm{ true }, "a"));
	}
	try {
		run_scripted(young_config_path(), short_script, 1, options_for(1, dir));
		FAIL();
	}
	catch (const ScriptError& e) {
		EXPECT_NE(std::string(e.what()).find("Intake"), std::string::npos) << e.what();
	}
}

#pragma once

#include <tactile/rig_sim.hpp>
#include <tactile/scheduler.hpp>

#include <optional>
#include <string>
#include <string_view>

namespace tactile {

enum class Gender { Female, Male };
enum class Response { First, Second };

std::string_view to_string(Gender gender);     // "FEMALE" / "MALE"
std::string_view to_string(Response response); // "First" / "Second"

std::optional<Gender> parse_gender(std::string_view text);
std::optional<Response> parse_response(std::string_view text);
std::optional<Presentation> parse_presentation(std::string_view text);
std::optional<TrialLabel> parse_label(std::string_view text);

struct Participant
{
	std::string id;
	std::string name;
	std::string surname;
	int age = 0;
	Gender gender = Gender::Female;
	std::string notes;

	friend bool operator==(const Participant&, const Participant&) = default;
};

inline constexpr int kMinAge = 18;
inline constexpr int kMaxAge = 120;

struct TrialRecord
{
	std::string participant_id;
	int trial_no = 1; // position in the session, 1-based
	TrialLabel label = TrialLabel::Trial;
	Presentation presentation = Presentation::SinglePinFirst;
	FtRecording ft_first;
	FtRecording ft_second;
	double distance = 0.0; // m
	Response response = Response::First;
	bool correct = false;

	friend bool operator==(const TrialRecord&, const TrialRecord&) = default;
};

/// True iff the response names the presentation that carried the two pins.
bool evaluate_response(Presentation presentation, Response response);
inline bool evaluate_response(const TrialPlan& plan, Response response)
{
	return evaluate_response(plan.presentation, response);
}

// Fixed precision of persisted numbers. Readings are rounded to it when a record is
// built, so a record equals what reading it back from disk yields.
inline constexpr int kValueDecimals = 6;
inline constexpr int kTimeDecimals = 3;

double round_to_decimals(double value, int decimals);
FtRecording canonical(FtRecording recording);

} // namespace tactile

#include <tactile/records.hpp>

#include <fmt/format.h>

#include <charconv>

namespace tactile {

std::string_view to_string(Gender gender) { return gender == Gender::Female ? "FEMALE" : "MALE"; }
std::string_view to_string(Response response) { return response == Response::First ? "First" : "Second"; }

std::optional<Gender> parse_gender(std::string_view text)
{
	if (text == "FEMALE" || text == "Female")
		return Gender::Female;
	if (text == "MALE" || text == "Male")
		return Gender::Male;
	return std::nullopt;
}

std::optional<Response> parse_response(std::string_view text)
{
	if (text == "First")
		return Response::First;
	if (text == "Second")
		return Response::Second;
	return std::nullopt;
}

std::optional<Presentation> parse_presentation(std::string_view text)
{
	if (text == "SinglePinFirst")
		return Presentation::SinglePinFirst;
	if (text == "TwoPinsFirst")
		return Presentation::TwoPinsFirst;
	return std::nullopt;
}

std::optional<TrialLabel> parse_label(std::string_view text)
{
	if (text == "Training")
		return TrialLabel::Training;
	if (text == "Trial")
		return TrialLabel::Trial;
	return std::nullopt;
}

bool evaluate_response(Presentation presentation, Response response)
{
	return (presentation == Presentation::TwoPinsFirst && response == Response::First) ||
		(presentation == Presentation::SinglePinFirst && response == Response::Second);
}

double round_to_decimals(double value, int decimals)
{
	const auto text = fmt::format("{:.{}f}", value, decimals);
	double out = 0.0;
	std::from_chars(text.data(), text.data() + text.size(), out);
	return out + 0.0;
}

FtRecording canonical(FtRecording recording)
{
	for (auto& s : recording.samples) {
		s.timestamp = round_to_decimals(s.timestamp, kTimeDecimals);
		s.fx = round_to_decimals(s.fx, kValueDecimals);
		s.fy = round_to_decimals(s.fy, kValueDecimals);
		s.fz = round_to_decimals(s.fz, kValueDecimals);
		s.tx = round_to_decimals(s.tx, kValueDecimals);
		s.ty = round_to_decimals(s.ty, kValueDecimals);
		s.tz = round_to_decimals(s.tz, kValueDecimals);
	}
	return recording;
}

} // namespace tactile

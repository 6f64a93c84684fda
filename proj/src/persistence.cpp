#include <tactile/persistence.hpp>

#include <tactile/error.hpp>
#include <tactile/xml_document.hpp>

#include <fmt/format.h>

#include <charconv>
#include <fcntl.h>
#include <fstream>
#include <sstream>
#include <unistd.h>

namespace tactile {

namespace {

constexpr int kFieldsPerReading = 7;

std::string fixed(double value, int decimals) { return fmt::format("{:.{}f}", value + 0.0, decimals); }

void append_recording(std::string& out, const FtRecording& r)
{
	out += fmt::format(",{}", r.samples.size());
	for (const auto& s : r.samples) {
		out += ',';
		out += fixed(s.timestamp, kTimeDecimals);
		for (double v : { s.fx, s.fy, s.fz, s.tx, s.ty, s.tz }) {
			out += ',';
			out += fixed(v, kValueDecimals);
		}
	}
}

std::vector<std::string_view> split_lines(std::string_view text)
{
	std::vector<std::string_view> lines;
	size_t start = 0;
	while (start < text.size()) {
		size_t end = text.find('\n', start);
		if (end == std::string_view::npos)
			end = text.size();
		lines.push_back(text.substr(start, end - start));
		start = end + 1;
	}
	return lines;
}

class FieldCursor
{
public:
	FieldCursor(std::vector<std::string> fields, size_t line, int trial)
		: fields_(std::move(fields)), line_(line), trial_(trial)
	{
	}

	bool exhausted() const { return pos_ >= fields_.size(); }
	size_t remaining() const { return fields_.size() - pos_; }

	const std::string& text(std::string_view what)
	{
		if (exhausted())
			fail(fmt::format("missing {}", what));
		return fields_[pos_++];
	}

	double number(std::string_view what)
	{
		const auto& t = text(what);
		double v = 0.0;
		auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
		if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
			fail(fmt::format("{} is not a number: \"{}\"", what, t));
		return v + 0.0;
	}

	int integer(std::string_view what)
	{
		const auto& t = text(what);
		int v = 0;
		auto [ptr, ec] = std::from_chars(t.data(), t.data() + t.size(), v);
		if (ec != std::errc() || ptr != t.data() + t.size() || t.empty())
			fail(fmt::format("{} is not an integer: \"{}\"", what, t));
		return v;
	}

	[[noreturn]] void fail(const std::string& what) const
	{
		throw FormatError(fmt::format("trial {} (line {}): {}", trial_, line_, what));
	}

private:
	std::vector<std::string> fields_;
	size_t pos_ = 0;
	size_t line_;
	int trial_;
};

FtRecording parse_recording(FieldCursor& c, std::string_view which)
{
	const int count = c.integer(fmt::format("{} reading count", which));
	if (count < 0)
		c.fail(fmt::format("negative {} reading count", which));
	// Trailing fields after the FT blocks: DISTANCE and RESPONSE (plus the second block for the first one).
	if (c.remaining() < static_cast<size_t>(count) * kFieldsPerReading)
		c.fail(fmt::format("truncated FT block: {} declares {} readings", which, count));
	FtRecording r;
	for (int i = 0; i < count; ++i) {
		FtSample s;
		s.timestamp = c.number("timestamp");
		s.fx = c.number("fx");
		s.fy = c.number("fy");
		s.fz = c.number("fz");
		s.tx = c.number("tx");
		s.ty = c.number("ty");
		s.tz = c.number("tz");
		r.samples.push_back(s);
	}
	return r;
}

TrialRecord parse_trial_fields(FieldCursor& c)
{
	TrialRecord t;
	t.participant_id = c.text("ID");
	t.trial_no = c.integer("No");
	const auto& pres = c.text("PRESENTATION");
	const auto presentation = parse_presentation(pres);
	if (!presentation)
		c.fail(fmt::format("unknown presentation \"{}\"", pres));
	t.presentation = *presentation;
	t.ft_first = parse_recording(c, "first");
	t.ft_second = parse_recording(c, "second");
	if (c.remaining() < 2)
		c.fail("truncated FT block or missing DISTANCE/RESPONSE");
	t.distance = c.number("DISTANCE");
	const auto& resp = c.text("RESPONSE");
	const auto response = parse_response(resp);
	if (!response)
		c.fail(fmt::format("unknown response \"{}\"", resp));
	t.response = *response;
	if (!c.exhausted())
		c.fail(fmt::format("{} unexpected trailing fields", c.remaining()));
	t.correct = evaluate_response(t.presentation, t.response);
	return t;
}

void apply_manifest(std::vector<TrialRecord>& trials, const SessionManifest* manifest)
{
	if (!manifest)
		return;
	for (auto& t : trials) {
		for (const auto& m : manifest->trials) {
			if (m.no != t.trial_no)
				continue;
			t.label = m.label;
			t.ft_first.touched = m.touched_first;
			t.ft_second.touched = m.touched_second;
			for (auto& s : t.ft_first.samples)
				s.touched = m.touched_first;
			for (auto& s : t.ft_second.samples)
				s.touched = m.touched_second;
			break;
		}
	}
}

bool holds_session(const fs::path& dir)
{
	return fs::exists(dir / "data.xml") || fs::exists(dir / "tmp.csv") || fs::exists(dir / "manifest.json");
}

} // namespace

ArchivePaths ArchivePaths::in_dir(const fs::path& dir, const Participant& p, const ExperimentParams& x)
{
	ArchivePaths paths;
	paths.dir = dir;
	paths.data_xml = dir / "data.xml";
	paths.participant_csv = dir / fmt::format("data-{}-{}{}", p.id, p.surname, x.participant_ext_file);
	paths.trial_csv = dir / fmt::format("data-{}-trial{}", p.id, x.trial_ext_file);
	paths.tmp_csv = dir / "tmp.csv";
	paths.manifest = dir / "manifest.json";
	return paths;
}

fs::path allocate_session_dir(const fs::path& data_path, const std::string& participant_id)
{
	fs::path dir = data_path / participant_id;
	for (int version = 2; holds_session(dir); ++version)
		dir = data_path / fmt::format("{}_v{}", participant_id, version);
	return dir;
}

std::string csv_field(std::string_view value)
{
	if (value.find_first_of(",\"\n\r") == std::string_view::npos)
		return std::string(value);
	std::string out = "\"";
	for (char c : value) {
		if (c == '"')
			out += '"';
		out += c;
	}
	out += '"';
	return out;
}

std::vector<std::string> split_csv_line(std::string_view line)
{
	std::vector<std::string> fields;
	std::string current;
	bool quoted = false;
	for (size_t i = 0; i < line.size(); ++i) {
		const char c = line[i];
		if (quoted) {
			if (c == '"') {
				if (i + 1 < line.size() && line[i + 1] == '"') {
					current += '"';
					++i;
				}
				else
					quoted = false;
			}
			else
				current += c;
		}
		else if (c == '"')
			quoted = true;
		else if (c == ',') {
			fields.push_back(std::move(current));
			current.clear();
		}
		else
			current += c;
	}
	if (quoted)
		throw FormatError("unterminated quoted field");
	fields.push_back(std::move(current));
	return fields;
}

std::string format_trial_line(const TrialRecord& r)
{
	std::string out = fmt::format("{},{},{}", csv_field(r.participant_id), r.trial_no, to_string(r.presentation));
	append_recording(out, r.ft_first);
	append_recording(out, r.ft_second);
	out += fmt::format(",{},{}", fixed(r.distance, kValueDecimals), to_string(r.response));
	return out;
}

std::string format_trial_csv(std::span<const TrialRecord> records)
{
	if (records.empty())
		return "0\n";
	std::string out = fmt::format("{},", records.size());
	for (const auto& r : records) {
		out += format_trial_line(r);
		out += '\n';
	}
	return out;
}

std::string format_participant_csv(const Participant& p)
{
	return fmt::format("{},{},{},{},{},{}\n", csv_field(p.id), csv_field(p.name), csv_field(p.surname), p.age,
		to_string(p.gender), csv_field(p.notes));
}

std::string format_data_xml(const std::string& data_name, const ExperimentParams& x,
	const std::string& participant_file, const std::string& trial_file)
{
	const auto esc = [](const std::string& s) { return xml::escape_attribute(s); };
	return fmt::format(
		"<?xml version=\"1.0\" encoding=\"utf-8\"?>\n"
		"\n"
		"<golem>\n"
		"  <data data_name=\"{}\">\n"
		"    <participant ext_file=\"{}\" filename=\"{}\"></participant>\n"
		"    <trials ext_file=\"{}\" filename=\"{}\"></trials>\n"
		"  </data>\n"
		"</golem>\n",
		esc(data_name), esc(x.participant_ext_file), esc(participant_file), esc(x.trial_ext_file), esc(trial_file));
}

std::vector<TrialRecord> parse_trial_csv(std::string_view text, const SessionManifest* manifest)
{
	const auto lines = split_lines(text);
	if (lines.empty())
		throw FormatError("trial file is empty: missing trial count");

	auto first = split_csv_line(lines[0]);
	int declared = 0;
	{
		const auto& n = first.front();
		auto [ptr, ec] = std::from_chars(n.data(), n.data() + n.size(), declared);
		if (ec != std::errc() || ptr != n.data() + n.size() || n.empty() || declared < 0)
			throw FormatError(fmt::format("line 1: invalid trial count \"{}\"", n));
	}
	if (declared == 0) {
		if (first.size() != 1 || lines.size() != 1)
			throw FormatError("line 1: trial count 0 followed by trial data");
		return {};
	}
	if (lines.size() != static_cast<size_t>(declared))
		throw FormatError(fmt::format("trial count {} declared on line 1 but the file holds {} trial lines", declared,
			lines.size()));

	std::vector<TrialRecord> trials;
	for (size_t i = 0; i < lines.size(); ++i) {
		auto fields = i == 0 ? std::vector<std::string>(first.begin() + 1, first.end()) : split_csv_line(lines[i]);
		FieldCursor cursor(std::move(fields), i + 1, static_cast<int>(i + 1));
		trials.push_back(parse_trial_fields(cursor));
	}
	apply_manifest(trials, manifest);
	return trials;
}

std::vector<TrialRecord> parse_tmp_csv(std::string_view text, const SessionManifest* manifest)
{
	std::vector<TrialRecord> trials;
	const auto lines = split_lines(text);
	for (size_t i = 0; i < lines.size(); ++i) {
		FieldCursor cursor(split_csv_line(lines[i]), i + 1, static_cast<int>(i + 1));
		trials.push_back(parse_trial_fields(cursor));
	}
	apply_manifest(trials, manifest);
	return trials;
}

Participant parse_participant_csv(std::string_view text)
{
	const auto lines = split_lines(text);
	if (lines.size() != 1)
		throw FormatError(fmt::format("participant file must hold exactly one line, found {}", lines.size()));
	const auto f = split_csv_line(lines[0]);
	if (f.size() != 6)
		throw FormatError(fmt::format("participant line has {} fields, expected 6", f.size()));
	Participant p;
	p.id = f[0];
	p.name = f[1];
	p.surname = f[2];
	auto [ptr, ec] = std::from_chars(f[3].data(), f[3].data() + f[3].size(), p.age);
	if (ec != std::errc() || ptr != f[3].data() + f[3].size() || f[3].empty())
		throw FormatError(fmt::format("participant age is not an integer: \"{}\"", f[3]));
	const auto gender = parse_gender(f[4]);
	if (!gender)
		throw FormatError(fmt::format("unknown gender \"{}\"", f[4]));
	p.gender = *gender;
	p.notes = f[5];
	return p;
}

void append_trial_tmp(const fs::path& path, const TrialRecord& record)
{
	const std::string line = format_trial_line(record) + "\n";
	const int fd = ::open(path.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
	if (fd < 0)
		throw Error(fmt::format("cannot open '{}' for appending", path.string()));
	size_t written = 0;
	while (written < line.size()) {
		const auto n = ::write(fd, line.data() + written, line.size() - written);
		if (n < 0) {
			::close(fd);
			throw Error(fmt::format("write to '{}' failed", path.string()));
		}
		written += static_cast<size_t>(n);
	}
	const bool synced = ::fsync(fd) == 0;
	::close(fd);
	if (!synced)
		throw Error(fmt::format("fsync of '{}' failed", path.string()));
}

std::string read_text_file(const fs::path& path)
{
	std::ifstream in(path, std::ios::binary);
	if (!in)
		throw Error(fmt::format("cannot open '{}'", path.string()));
	std::ostringstream buffer;
	buffer << in.rdbuf();
	return buffer.str();
}

void write_text_file(const fs::path& path, std::string_view text)
{
	const fs::path tmp = path.string() + ".part";
	{
		std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
		if (!out)
			throw Error(fmt::format("cannot open '{}' for writing", tmp.string()));
		out.write(text.data(), static_cast<std::streamsize>(text.size()));
		out.flush();
		if (!out)
			throw Error(fmt::format("write to '{}' failed", tmp.string()));
	}
	fs::rename(tmp, path);
}

ArchivePaths write_archive(const SessionArchive& archive, const ExperimentParams& experiment)
{
	fs::path dir = archive.paths.dir;
	if (dir.empty())
		throw Error("archive has no target directory");
	if (fs::exists(dir / "data.xml")) {
		const fs::path base = dir;
		for (int version = 2; fs::exists(dir / "data.xml"); ++version)
			dir = fmt::format("{}_v{}", base.string(), version);
	}
	fs::create_directories(dir);

	ArchivePaths paths = ArchivePaths::in_dir(dir, archive.participant, experiment);
	paths.tmp_csv = archive.paths.tmp_csv.empty() ? paths.tmp_csv : archive.paths.tmp_csv;
	paths.manifest = archive.paths.manifest.empty() ? paths.manifest : archive.paths.manifest;

	write_text_file(paths.participant_csv, format_participant_csv(archive.participant));
	write_text_file(paths.trial_csv, format_trial_csv(archive.trials));
	write_text_file(paths.data_xml, format_data_xml(archive.data_name, experiment,
		paths.participant_csv.filename().string(), paths.trial_csv.filename().string()));
	return paths;
}

std::vector<TrialRecord> read_trial_csv(const fs::path& path, const SessionManifest* manifest)
{
	return parse_trial_csv(read_text_file(path), manifest);
}

std::vector<TrialRecord> read_tmp_csv(const fs::path& path, const SessionManifest* manifest)
{
	if (!fs::exists(path))
		return {};
	return parse_tmp_csv(read_text_file(path), manifest);
}

SessionArchive read_archive(const fs::path& dir)
{
	const auto doc = xml::parse(read_text_file(dir / "data.xml"));
	const auto* data = doc.find("data");
	const auto* participant = doc.find("participant");
	const auto* trials = doc.find("trials");
	if (!data || !participant || !trials)
		throw FormatError(fmt::format("{}: data.xml lacks data/participant/trials elements", dir.string()));
	const auto* pfile = participant->attribute("filename");
	const auto* tfile = trials->attribute("filename");
	if (!pfile || !tfile)
		throw FormatError(fmt::format("{}: data.xml lacks filename attributes", dir.string()));

	SessionArchive archive;
	if (const auto* name = data->attribute("data_name"))
		archive.data_name = *name;

	std::optional<SessionManifest> manifest;
	if (fs::exists(dir / "manifest.json"))
		manifest = read_manifest(dir / "manifest.json");

	archive.participant = parse_participant_csv(read_text_file(dir / *pfile));
	archive.trials = read_trial_csv(dir / *tfile, manifest ? &*manifest : nullptr);
	archive.paths.dir = dir;
	archive.paths.data_xml = dir / "data.xml";
	archive.paths.participant_csv = dir / *pfile;
	archive.paths.trial_csv = dir / *tfile;
	archive.paths.tmp_csv = dir / "tmp.csv";
	archive.paths.manifest = dir / "manifest.json";
	return archive;
}

} // namespace tactile

#pragma once

#include <memory>
#include <optional>
#include <string>
#include <string_view>
#include <utility>
#include <vector>

namespace tactile::xml {

/// Minimal read-only element tree. Comments and processing instructions are dropped,
/// character data is kept only as the concatenated text of each element.
struct Element
{
	std::string name;
	std::vector<std::pair<std::string, std::string>> attributes; // document order
	std::vector<Element> children;
	std::string text;
	long line = 0;

	const std::string* attribute(std::string_view key) const;

	/// Depth-first search including this element.
	const Element* find(std::string_view element_name) const;
};

/// Parses a complete XML document. Throws ConfigError(Parse) with the line of the failure.
Element parse(std::string_view text);

/// Escapes &, <, >, " and ' for use inside a double-quoted attribute value.
std::string escape_attribute(std::string_view value);

} // namespace tactile::xml

#include <tactile/xml_document.hpp>

#include <tactile/error.hpp>

#include <expat.h>
#include <fmt/format.h>

namespace tactile::xml {

namespace {

struct Builder
{
	XML_Parser parser = nullptr;
	Element root;
	bool has_root = false;
	std::vector<Element*> stack;

	static void XMLCALL on_start(void* user, const XML_Char* name, const XML_Char** atts)
	{
		auto* self = static_cast<Builder*>(user);
		Element e;
		e.name = name;
		e.line = static_cast<long>(XML_GetCurrentLineNumber(self->parser));
		for (size_t i = 0; atts[i] != nullptr; i += 2)
			e.attributes.emplace_back(atts[i], atts[i + 1]);

		if (self->stack.empty()) {
			self->root = std::move(e);
			self->has_root = true;
			self->stack.push_back(&self->root);
		}
		else {
			auto& children = self->stack.back()->children;
			children.push_back(std::move(e));
			self->stack.push_back(&children.back());
		}
	}

	static void XMLCALL on_end(void* user, const XML_Char*)
	{
		static_cast<Builder*>(user)->stack.pop_back();
	}

	static void XMLCALL on_text(void* user, const XML_Char* s, int len)
	{
		auto* self = static_cast<Builder*>(user);
		if (!self->stack.empty())
			self->stack.back()->text.append(s, static_cast<size_t>(len));
	}
};

} // namespace

const std::string* Element::attribute(std::string_view key) const
{
	for (const auto& [k, v] : attributes)
		if (k == key)
			return &v;
	return nullptr;
}

const Element* Element::find(std::string_view element_name) const
{
	if (name == element_name)
		return this;
	for (const auto& child : children)
		if (const auto* hit = child.find(element_name))
			return hit;
	return nullptr;
}

Element parse(std::string_view text)
{
	Builder builder;
	std::unique_ptr<XML_ParserStruct, decltype(&XML_ParserFree)> parser(XML_ParserCreate(nullptr), &XML_ParserFree);
	if (!parser)
		throw ConfigError(ConfigError::Kind::Parse, "cannot create XML parser");
	builder.parser = parser.get();
	XML_SetUserData(parser.get(), &builder);
	XML_SetElementHandler(parser.get(), &Builder::on_start, &Builder::on_end);
	XML_SetCharacterDataHandler(parser.get(), &Builder::on_text);

	if (XML_Parse(parser.get(), text.data(), static_cast<int>(text.size()), XML_TRUE) == XML_STATUS_ERROR) {
		throw ConfigError(ConfigError::Kind::Parse,
			fmt::format("XML parse error at line {}: {}", XML_GetCurrentLineNumber(parser.get()),
				XML_ErrorString(XML_GetErrorCode(parser.get()))));
	}
	if (!builder.has_root)
		throw ConfigError(ConfigError::Kind::Parse, "XML parse error at line 1: no root element");
	return std::move(builder.root);
}

std::string escape_attribute(std::string_view value)
{
	std::string out;
	out.reserve(value.size());
	for (char c : value) {
		switch (c) {
		case '&': out += "&amp;"; break;
		case '<': out += "&lt;"; break;
		case '>': out += "&gt;"; break;
		case '"': out += "&quot;"; break;
		case '\'': out += "&apos;"; break;
		case '\n': out += "&#10;"; break;
		case '\r': out += "&#13;"; break;
		case '\t': out += "&#9;"; break;
		default: out += c;
		}
	}
	return out;
}

} // namespace tactile::xml

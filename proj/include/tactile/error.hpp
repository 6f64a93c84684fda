#pragma once

#include <stdexcept>
#include <string>

namespace tactile {

/// Base class for every error raised by the library.
class Error : public std::runtime_error
{
public:
	using std::runtime_error::runtime_error;
};

/// Config document could not be turned into a DemoConfig.
class ConfigError : public Error
{
public:
	enum class Kind { Parse, Schema, Type, Invalid };

	ConfigError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

	Kind kind() const noexcept { return kind_; }

private:
	Kind kind_;
};

/// Rig command refused by the simulated hardware.
class RigError : public Error
{
public:
	enum class Kind { Lifecycle, Workspace, Domain };

	RigError(Kind kind, const std::string& what) : Error(what), kind_(kind) {}

	Kind kind() const noexcept { return kind_; }

private:
	Kind kind_;
};

/// Raised when a scheduler cannot be built (no distances) or is misused.
class SchedulerError : public Error
{
public:
	using Error::Error;
};

/// Operator event not legal in the current session phase.
class PhaseError : public Error
{
public:
	using Error::Error;
};

/// Operator input rejected by validation (e.g. an age outside the accepted range).
class InputError : public Error
{
public:
	using Error::Error;
};

/// On-disk archive does not follow the expected grammar.
class FormatError : public Error
{
public:
	using Error::Error;
};

/// Fit of the psychometric function is not meaningful for the data.
class FitError : public Error
{
public:
	using Error::Error;
};

} // namespace tactile

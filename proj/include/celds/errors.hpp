#pragma once

#include <stdexcept>
#include <string>

namespace celds {

// Raised when an operation's precondition does not hold.
class ContractViolation : public std::logic_error {
public:
    using std::logic_error::logic_error;
};

class AssignmentError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ElectionError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class InstantiationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ParseError : public std::runtime_error {
public:
    ParseError(const std::string& what, int line = 0)
        : std::runtime_error(line > 0 ? "line " + std::to_string(line) + ": " + what : what), line_(line)
    {
    }
    int line() const noexcept { return line_; }

private:
    int line_;
};

class ScenarioError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class ExplorationError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

class FaultScheduleError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

// Missing or unreadable input file.
class FileError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace celds

#ifndef GAUI_ERRORS_HPP
#define GAUI_ERRORS_HPP

#include <cstdint>
#include <stdexcept>
#include <string>

namespace gaui {

using TimeMs = std::int64_t;

// Raised when a timestamped input arrives out of order. The receiver's state
// is left untouched.
class StreamOrderError : public std::runtime_error {
public:
    StreamOrderError(TimeMs last, TimeMs got)
        : std::runtime_error("stream order violation: t_ms " + std::to_string(got) +
                             " after " + std::to_string(last)),
          last_(last), got_(got) {}

    TimeMs last() const { return last_; }
    TimeMs got() const { return got_; }

private:
    TimeMs last_;
    TimeMs got_;
};

class ConfigError : public std::runtime_error {
public:
    using std::runtime_error::runtime_error;
};

} // namespace gaui

#endif // GAUI_ERRORS_HPP

#pragma once

#include <stdexcept>
#include <string>

namespace chewseg {

/// Base class for every error raised by the library. The message is meant
/// to be shown to a user as-is (it names the file/line/row when known).
class Error : public std::runtime_error {
public:
    explicit Error(const std::string& what) : std::runtime_error(what) {}
};

class ParseError : public Error {
public:
    using Error::Error;
};

class InvalidArgument : public Error {
public:
    using Error::Error;
};

}  // namespace chewseg

#pragma once

#include <cstddef>
#include <stdexcept>
#include <string>

namespace scms {

class error : public std::runtime_error
{
public:
    using std::runtime_error::runtime_error;
};

/// Malformed or truncated canonical encoding.
class parse_error : public error
{
public:
    parse_error(std::size_t offset, const std::string& what) :
        error("parse error at offset " + std::to_string(offset) + ": " + what), offset_(offset)
    {
    }

    std::size_t offset() const noexcept { return offset_; }

private:
    std::size_t offset_;
};

/// Authenticated decryption failed (wrong key or tampered ciphertext).
class decryption_error : public error
{
public:
    decryption_error() : error("authenticated decryption failed") {}
};

/// Certificate violates the feature profile of its type.
class profile_error : public error
{
public:
    using error::error;
};

/// Access to a store namespace by a component that does not own it.
class isolation_violation : public error
{
public:
    using error::error;
};

/// A request was refused by a component (rate limit, bad signature, blacklist, ...).
class refused : public error
{
public:
    using error::error;
};

} // namespace scms

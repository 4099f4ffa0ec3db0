#pragma once

#include <cstddef>
#include <optional>
#include <string>
#include <utility>
#include <variant>

namespace btsf {

enum class Errc {
    // bencode
    truncated,
    malformed,
    depth_exceeded,
    // keycodec
    invalid_symbol,
    invalid_length,
    bad_length,
    bad_alphabet,
    unknown_key_type,
    no_params,
    bad_base32_param,
    // metadata
    not_a_dict,
    not_parseable,
    bad_share_id_length,
    not_hex,
    unreadable,
    // netdissect
    bad_magic,
    truncated_record,
    // correlate / fixtures / cli
    bad_hint_schema,
    io_failure,
    usage,
};

const char* errc_name(Errc c);

struct Error {
    Errc code;
    std::string message;
    std::optional<std::size_t> offset;

    std::string to_string() const;
};

inline Error make_error(Errc code, std::string message) {
    return Error{code, std::move(message), std::nullopt};
}

inline Error make_error(Errc code, std::string message, std::size_t offset) {
    return Error{code, std::move(message), offset};
}

// Minimal expected-style result. Parsers return either a value or a typed
// error; soft anomalies travel as warnings inside the value instead.
template <typename T>
class Result {
public:
    Result(T value) : v_(std::move(value)) {}
    Result(Error error) : v_(std::move(error)) {}

    bool ok() const { return std::holds_alternative<T>(v_); }
    explicit operator bool() const { return ok(); }

    T& value() { return std::get<T>(v_); }
    const T& value() const { return std::get<T>(v_); }
    T&& take() { return std::move(std::get<T>(v_)); }

    Error& error() { return std::get<Error>(v_); }
    const Error& error() const { return std::get<Error>(v_); }

private:
    std::variant<T, Error> v_;
};

} // namespace btsf

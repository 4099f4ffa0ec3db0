#pragma once

#include <cstdint>
#include <string_view>
#include <utility>
#include <variant>
#include <vector>

#include "btsf/bytes.hpp"
#include "btsf/error.hpp"

namespace btsf::bencode {

// Byte range [begin, end) in the buffer a value was decoded from.
struct Span {
    std::size_t begin = 0;
    std::size_t end = 0;
    std::size_t size() const { return end - begin; }
};

class BValue {
public:
    using List = std::vector<BValue>;
    // Dicts keep decode order; keys are raw bytes and unique within one dict.
    using Dict = std::vector<std::pair<Bytes, BValue>>;
    using Data = std::variant<Bytes, std::int64_t, List, Dict>;

    BValue() : data_(Bytes{}) {}
    explicit BValue(Data data) : data_(std::move(data)) {}

    static BValue str(std::string_view s) { return BValue(Data{to_bytes(s)}); }
    static BValue bin(Bytes b) { return BValue(Data{std::move(b)}); }
    static BValue integer(std::int64_t i) { return BValue(Data{i}); }
    static BValue list(List l) { return BValue(Data{std::move(l)}); }
    static BValue dict(Dict d) { return BValue(Data{std::move(d)}); }

    bool is_bytes() const { return std::holds_alternative<Bytes>(data_); }
    bool is_int() const { return std::holds_alternative<std::int64_t>(data_); }
    bool is_list() const { return std::holds_alternative<List>(data_); }
    bool is_dict() const { return std::holds_alternative<Dict>(data_); }

    const Bytes& as_bytes() const { return std::get<Bytes>(data_); }
    std::int64_t as_int() const { return std::get<std::int64_t>(data_); }
    const List& as_list() const { return std::get<List>(data_); }
    const Dict& as_dict() const { return std::get<Dict>(data_); }
    List& as_list() { return std::get<List>(data_); }
    Dict& as_dict() { return std::get<Dict>(data_); }

    std::string as_text() const { return to_string(as_bytes()); }

    // Dict lookup by textual key; nullptr when absent or not a dict.
    const BValue* find(std::string_view key) const;

    // Structural equality; dicts compare as key->value maps, spans ignored.
    bool operator==(const BValue& other) const;

    Span span;

private:
    Data data_;
};

struct DecodeWarning {
    std::size_t offset;
    std::string message;
};

struct Decoded {
    BValue value;
    std::size_t consumed = 0;
    std::vector<DecodeWarning> warnings;
};

inline constexpr int kMaxDepth = 64;

// Decodes the first complete value from the buffer. Trailing bytes are
// reported through `consumed`, not treated as an error. Duplicate dict keys
// keep the first occurrence and add a warning; unsorted dict keys are
// accepted as-is.
Result<Decoded> decode(ByteView buffer);

// Canonical form: dict keys sorted by raw byte order.
Bytes encode(const BValue& value);

using PathElem = std::variant<std::string, std::size_t>;

// Walks dict keys / list indices; nullptr on any miss, never an error.
const BValue* get_path(const BValue& root, const std::vector<PathElem>& path);

} // namespace btsf::bencode

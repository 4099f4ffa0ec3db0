#include "btsf/bencode.hpp"

#include <algorithm>
#include <limits>

namespace btsf::bencode {

const BValue* BValue::find(std::string_view key) const {
    if (!is_dict()) return nullptr;
    for (const auto& [k, v] : as_dict()) {
        if (k.size() == key.size() &&
            std::equal(k.begin(), k.end(), key.begin(),
                       [](std::uint8_t a, char b) { return a == static_cast<std::uint8_t>(b); })) {
            return &v;
        }
    }
    return nullptr;
}

bool BValue::operator==(const BValue& other) const {
    if (is_bytes() && other.is_bytes()) return as_bytes() == other.as_bytes();
    if (is_int() && other.is_int()) return as_int() == other.as_int();
    if (is_list() && other.is_list()) return as_list() == other.as_list();
    if (is_dict() && other.is_dict()) {
        // Key order is a decode artifact; compare as maps. Keys are unique.
        const Dict& a = as_dict();
        const Dict& b = other.as_dict();
        if (a.size() != b.size()) return false;
        for (const auto& [key, value] : a) {
            auto it = std::find_if(b.begin(), b.end(),
                                   [&](const auto& kv) { return kv.first == key; });
            if (it == b.end() || !(it->second == value)) return false;
        }
        return true;
    }
    return false;
}

namespace {

class Decoder {
public:
    explicit Decoder(ByteView buf) : buf_(buf) {}

    Result<Decoded> run() {
        if (buf_.empty()) return make_error(Errc::truncated, "empty input", 0);
        auto v = parse_value(1);
        if (!v) return v.error();
        Decoded out;
        out.value = v.take();
        out.consumed = pos_;
        out.warnings = std::move(warnings_);
        return out;
    }

private:
    Result<BValue> parse_value(int depth) {
        if (depth > kMaxDepth)
            return make_error(Errc::depth_exceeded, "nesting deeper than 64", pos_);
        if (eof()) return truncated("value");
        std::size_t begin = pos_;
        std::uint8_t c = buf_[pos_];
        if (c == 'i') return parse_integer(begin);
        if (c == 'l') return parse_list(begin, depth);
        if (c == 'd') return parse_dict(begin, depth);
        if (c >= '0' && c <= '9') return parse_string(begin);
        return make_error(Errc::malformed, "unexpected byte 0x" + to_hex(ByteView(&c, 1)), pos_);
    }

    Result<BValue> parse_integer(std::size_t begin) {
        ++pos_; // 'i'
        bool negative = false;
        if (!eof() && buf_[pos_] == '-') {
            negative = true;
            ++pos_;
        }
        std::size_t digits_begin = pos_;
        std::int64_t value = 0;
        while (!eof() && buf_[pos_] >= '0' && buf_[pos_] <= '9') {
            int d = buf_[pos_] - '0';
            if (value > (std::numeric_limits<std::int64_t>::max() - d) / 10)
                return make_error(Errc::malformed, "integer overflow", digits_begin);
            value = value * 10 + d;
            ++pos_;
        }
        std::size_t ndigits = pos_ - digits_begin;
        if (eof()) return truncated("integer");
        if (ndigits == 0)
            return make_error(Errc::malformed, "integer has no digits", pos_);
        if (buf_[pos_] != 'e')
            return make_error(Errc::malformed, "integer not terminated by 'e'", pos_);
        if (ndigits > 1 && buf_[digits_begin] == '0')
            return make_error(Errc::malformed, "integer has leading zero", digits_begin);
        if (negative && value == 0)
            return make_error(Errc::malformed, "negative zero", begin);
        ++pos_; // 'e'
        BValue out = BValue::integer(negative ? -value : value);
        out.span = {begin, pos_};
        return out;
    }

    Result<BValue> parse_string(std::size_t begin) {
        std::size_t len_begin = pos_;
        std::uint64_t len = 0;
        while (!eof() && buf_[pos_] >= '0' && buf_[pos_] <= '9') {
            int d = buf_[pos_] - '0';
            if (len > (std::numeric_limits<std::uint64_t>::max() - static_cast<std::uint64_t>(d)) / 10)
                return make_error(Errc::malformed, "string length overflow", len_begin);
            len = len * 10 + static_cast<std::uint64_t>(d);
            ++pos_;
        }
        if (eof()) return truncated("string length");
        if (buf_[pos_] != ':')
            return make_error(Errc::malformed, "string length not followed by ':'", pos_);
        if (pos_ - len_begin > 1 && buf_[len_begin] == '0')
            warn(len_begin, "string length has leading zero");
        ++pos_; // ':'
        if (len > buf_.size() - pos_) return truncated("string body");
        BValue out = BValue::bin(Bytes(buf_.begin() + static_cast<std::ptrdiff_t>(pos_),
                                       buf_.begin() + static_cast<std::ptrdiff_t>(pos_ + len)));
        pos_ += len;
        out.span = {begin, pos_};
        return out;
    }

    Result<BValue> parse_list(std::size_t begin, int depth) {
        ++pos_; // 'l'
        BValue::List items;
        while (true) {
            if (eof()) return truncated("list");
            if (buf_[pos_] == 'e') {
                ++pos_;
                break;
            }
            auto item = parse_value(depth + 1);
            if (!item) return item.error();
            items.push_back(item.take());
        }
        BValue out = BValue::list(std::move(items));
        out.span = {begin, pos_};
        return out;
    }

    Result<BValue> parse_dict(std::size_t begin, int depth) {
        ++pos_; // 'd'
        BValue::Dict entries;
        while (true) {
            if (eof()) return truncated("dict");
            if (buf_[pos_] == 'e') {
                ++pos_;
                break;
            }
            std::size_t key_off = pos_;
            if (buf_[pos_] < '0' || buf_[pos_] > '9')
                return make_error(Errc::malformed, "dict key is not a string", pos_);
            auto key = parse_string(key_off);
            if (!key) return key.error();
            auto value = parse_value(depth + 1);
            if (!value) return value.error();
            const Bytes& kb = key.value().as_bytes();
            auto dup = std::find_if(entries.begin(), entries.end(),
                                    [&](const auto& kv) { return kv.first == kb; });
            if (dup != entries.end()) {
                // Keep the first occurrence; evidence is never dropped silently.
                warn(key_off, "duplicate dict key '" + printable_or_hex(kb) +
                                  "', first occurrence kept (offset " +
                                  std::to_string(dup->second.span.begin) + ")");
            } else {
                entries.emplace_back(kb, value.take());
            }
        }
        BValue out = BValue::dict(std::move(entries));
        out.span = {begin, pos_};
        return out;
    }

    bool eof() const { return pos_ >= buf_.size(); }

    Error truncated(const char* what) {
        return make_error(Errc::truncated, std::string("input ends mid-") + what, pos_);
    }

    void warn(std::size_t offset, std::string message) {
        warnings_.push_back({offset, std::move(message)});
    }

    ByteView buf_;
    std::size_t pos_ = 0;
    std::vector<DecodeWarning> warnings_;
};

void encode_into(const BValue& value, Bytes& out) {
    if (value.is_bytes()) {
        const Bytes& b = value.as_bytes();
        std::string len = std::to_string(b.size());
        out.insert(out.end(), len.begin(), len.end());
        out.push_back(':');
        out.insert(out.end(), b.begin(), b.end());
    } else if (value.is_int()) {
        out.push_back('i');
        std::string n = std::to_string(value.as_int());
        out.insert(out.end(), n.begin(), n.end());
        out.push_back('e');
    } else if (value.is_list()) {
        out.push_back('l');
        for (const BValue& item : value.as_list()) encode_into(item, out);
        out.push_back('e');
    } else {
        out.push_back('d');
        const BValue::Dict& d = value.as_dict();
        std::vector<std::size_t> order(d.size());
        for (std::size_t i = 0; i < d.size(); ++i) order[i] = i;
        std::sort(order.begin(), order.end(), [&](std::size_t a, std::size_t b) {
            return d[a].first < d[b].first;
        });
        for (std::size_t i : order) {
            std::string len = std::to_string(d[i].first.size());
            out.insert(out.end(), len.begin(), len.end());
            out.push_back(':');
            out.insert(out.end(), d[i].first.begin(), d[i].first.end());
            encode_into(d[i].second, out);
        }
        out.push_back('e');
    }
}

} // namespace

Result<Decoded> decode(ByteView buffer) {
    return Decoder(buffer).run();
}

Bytes encode(const BValue& value) {
    Bytes out;
    encode_into(value, out);
    return out;
}

const BValue* get_path(const BValue& root, const std::vector<PathElem>& path) {
    const BValue* cur = &root;
    for (const PathElem& elem : path) {
        if (!cur) return nullptr;
        if (std::holds_alternative<std::string>(elem)) {
            cur = cur->find(std::get<std::string>(elem));
        } else {
            std::size_t idx = std::get<std::size_t>(elem);
            if (!cur->is_list() || idx >= cur->as_list().size()) return nullptr;
            cur = &cur->as_list()[idx];
        }
    }
    return cur;
}

} // namespace btsf::bencode

#include "btsf/error.hpp"

namespace btsf {

const char* errc_name(Errc c) {
    switch (c) {
        case Errc::truncated: return "Truncated";
        case Errc::malformed: return "Malformed";
        case Errc::depth_exceeded: return "DepthExceeded";
        case Errc::invalid_symbol: return "InvalidSymbol";
        case Errc::invalid_length: return "InvalidLength";
        case Errc::bad_length: return "BadLength";
        case Errc::bad_alphabet: return "BadAlphabet";
        case Errc::unknown_key_type: return "UnknownType";
        case Errc::no_params: return "NoParams";
        case Errc::bad_base32_param: return "BadBase32Param";
        case Errc::not_a_dict: return "NotADict";
        case Errc::not_parseable: return "NotParseable";
        case Errc::bad_share_id_length: return "BadShareIdLength";
        case Errc::not_hex: return "NotHex";
        case Errc::unreadable: return "Unreadable";
        case Errc::bad_magic: return "BadMagic";
        case Errc::truncated_record: return "TruncatedRecord";
        case Errc::bad_hint_schema: return "BadHintSchema";
        case Errc::io_failure: return "IoFailure";
        case Errc::usage: return "Usage";
    }
    return "Unknown";
}

std::string Error::to_string() const {
    std::string out = errc_name(code);
    out += ": ";
    out += message;
    if (offset) {
        out += " (offset ";
        out += std::to_string(*offset);
        out += ")";
    }
    return out;
}

} // namespace btsf

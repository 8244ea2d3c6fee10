#include "tokgraft/json_util.hpp"

#include <openssl/evp.h>

#include <cmath>
#include <cstdio>
#include <fstream>
#include <sstream>

#include "tokgraft/errors.hpp"

namespace tokgraft {

namespace {

void append_escaped(std::string& out, std::string_view s) {
    out.push_back('"');
    for (char c : s) {
        switch (c) {
            case '"': out += "\\\""; break;
            case '\\': out += "\\\\"; break;
            case '\b': out += "\\b"; break;
            case '\f': out += "\\f"; break;
            case '\n': out += "\\n"; break;
            case '\r': out += "\\r"; break;
            case '\t': out += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out += buf;
                } else {
                    out.push_back(c);
                }
        }
    }
    out.push_back('"');
}

void dump_value(const nlohmann::json& v, std::string& out, int depth) {
    const std::string indent(static_cast<std::size_t>(depth) * 2, ' ');
    const std::string child_indent(static_cast<std::size_t>(depth + 1) * 2, ' ');
    switch (v.type()) {
        case nlohmann::json::value_t::null:
            out += "null";
            break;
        case nlohmann::json::value_t::boolean:
            out += v.get<bool>() ? "true" : "false";
            break;
        case nlohmann::json::value_t::number_integer: {
            out += std::to_string(v.get<std::int64_t>());
            break;
        }
        case nlohmann::json::value_t::number_unsigned: {
            out += std::to_string(v.get<std::uint64_t>());
            break;
        }
        case nlohmann::json::value_t::number_float: {
            const double d = v.get<double>();
            if (!std::isfinite(d)) {
                raise(Errc::invalid_argument, "non-finite number in report JSON");
            }
            char buf[64];
            std::snprintf(buf, sizeof(buf), "%.6f", d);
            out += buf;
            break;
        }
        case nlohmann::json::value_t::string:
            append_escaped(out, v.get_ref<const std::string&>());
            break;
        case nlohmann::json::value_t::array: {
            if (v.empty()) {
                out += "[]";
                break;
            }
            out += "[\n";
            for (std::size_t i = 0; i < v.size(); ++i) {
                out += child_indent;
                dump_value(v[i], out, depth + 1);
                if (i + 1 < v.size()) {
                    out.push_back(',');
                }
                out.push_back('\n');
            }
            out += indent;
            out.push_back(']');
            break;
        }
        case nlohmann::json::value_t::object: {
            if (v.empty()) {
                out += "{}";
                break;
            }
            out += "{\n";
            std::size_t i = 0;
            for (auto it = v.begin(); it != v.end(); ++it, ++i) {  // keys are sorted
                out += child_indent;
                append_escaped(out, it.key());
                out += ": ";
                dump_value(it.value(), out, depth + 1);
                if (i + 1 < v.size()) {
                    out.push_back(',');
                }
                out.push_back('\n');
            }
            out += indent;
            out.push_back('}');
            break;
        }
        default:
            raise(Errc::invalid_argument, "unsupported JSON value type");
    }
}

}  // namespace

std::string canonical_dump(const nlohmann::json& value) {
    std::string out;
    dump_value(value, out, 0);
    out.push_back('\n');
    return out;
}

std::string sha256_hex(std::string_view data) {
    unsigned char digest[EVP_MAX_MD_SIZE];
    unsigned int digest_len = 0;
    if (EVP_Digest(data.data(), data.size(), digest, &digest_len, EVP_sha256(), nullptr) != 1) {
        raise(Errc::invalid_argument, "SHA-256 computation failed");
    }
    static const char* hex = "0123456789abcdef";
    std::string out;
    out.reserve(digest_len * 2);
    for (unsigned int i = 0; i < digest_len; ++i) {
        out.push_back(hex[digest[i] >> 4]);
        out.push_back(hex[digest[i] & 0xF]);
    }
    return out;
}

std::string read_text_file(const std::filesystem::path& path) {
    std::ifstream in(path, std::ios::binary);
    if (!in) {
        raise(Errc::io_error, "cannot open " + path.string());
    }
    std::ostringstream ss;
    ss << in.rdbuf();
    if (in.bad()) {
        raise(Errc::io_error, "read failed for " + path.string());
    }
    return ss.str();
}

void write_text_file(const std::filesystem::path& path, std::string_view content) {
    if (path.has_parent_path()) {
        std::error_code ec;
        std::filesystem::create_directories(path.parent_path(), ec);
    }
    std::ofstream out(path, std::ios::binary | std::ios::trunc);
    if (!out) {
        raise(Errc::io_error, "cannot open " + path.string() + " for writing");
    }
    out.write(content.data(), static_cast<std::streamsize>(content.size()));
    if (!out) {
        raise(Errc::io_error, "write failed for " + path.string());
    }
}

nlohmann::json read_json_file(const std::filesystem::path& path) {
    const std::string text = read_text_file(path);
    nlohmann::json j = nlohmann::json::parse(text, nullptr, false);
    if (j.is_discarded()) {
        raise(Errc::invalid_format, "malformed JSON in " + path.string());
    }
    return j;
}

void write_json_file(const std::filesystem::path& path, const nlohmann::json& value) {
    write_text_file(path, canonical_dump(value));
}

}  // namespace tokgraft

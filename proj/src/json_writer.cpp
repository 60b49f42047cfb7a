#include "cvest/json_writer.hpp"

#include <cmath>
#include <cstdio>

namespace cvest {

std::string format_double(double value) {
    if (!std::isfinite(value)) {
        // JSON has no literal for these; callers that can legitimately hold
        // them (e.g. a relative error against a zero baseline) expect "null".
        return "null";
    }
    char buf[40];
    std::snprintf(buf, sizeof(buf), "%.17g", value);
    return buf;
}

void JsonWriter::separator() {
    if (pending_key_) {
        pending_key_ = false;
        return;
    }
    if (!need_comma_.empty()) {
        if (need_comma_.back()) out_ += ',';
        need_comma_.back() = true;
    }
}

void JsonWriter::append_escaped(const std::string& s) {
    out_ += '"';
    for (char c : s) {
        switch (c) {
            case '"': out_ += "\\\""; break;
            case '\\': out_ += "\\\\"; break;
            case '\n': out_ += "\\n"; break;
            case '\r': out_ += "\\r"; break;
            case '\t': out_ += "\\t"; break;
            default:
                if (static_cast<unsigned char>(c) < 0x20) {
                    char buf[8];
                    std::snprintf(buf, sizeof(buf), "\\u%04x", c);
                    out_ += buf;
                } else {
                    out_ += c;
                }
        }
    }
    out_ += '"';
}

void JsonWriter::begin_object() {
    separator();
    out_ += '{';
    need_comma_.push_back(false);
}

void JsonWriter::end_object() {
    out_ += '}';
    need_comma_.pop_back();
}

void JsonWriter::begin_array() {
    separator();
    out_ += '[';
    need_comma_.push_back(false);
}

void JsonWriter::end_array() {
    out_ += ']';
    need_comma_.pop_back();
}

void JsonWriter::key(const std::string& name) {
    separator();
    append_escaped(name);
    out_ += ':';
    pending_key_ = true;
}

void JsonWriter::value(double v) {
    separator();
    out_ += format_double(v);
}

void JsonWriter::value(const std::string& v) {
    separator();
    append_escaped(v);
}

void JsonWriter::value(const char* v) { value(std::string(v)); }

void JsonWriter::value(bool v) {
    separator();
    out_ += v ? "true" : "false";
}

void JsonWriter::value_uint(std::uint64_t v) {
    separator();
    out_ += std::to_string(v);
}

void JsonWriter::value_int(std::int64_t v) {
    separator();
    out_ += std::to_string(v);
}

void JsonWriter::null() {
    separator();
    out_ += "null";
}

void JsonWriter::value_array(const std::vector<double>& values) {
    begin_array();
    for (double v : values) value(v);
    end_array();
}

} // namespace cvest

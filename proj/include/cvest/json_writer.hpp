#pragma once

#include <cstddef>
#include <cstdint>
#include <string>
#include <vector>

namespace cvest {

// %.17g rendering: enough digits that parsing the text recovers the exact
// double. All files this project writes (reports, models, CSV, JSONL) go
// through this, which is what makes seeded runs byte-identical.
std::string format_double(double value);

// Minimal streaming JSON writer with fixed key order (insertion order).
// Output is compact, single line unless the caller adds newlines between
// top-level documents.
class JsonWriter {
public:
    void begin_object();
    void end_object();
    void begin_array();
    void end_array();

    void key(const std::string& name);

    void value(double v);
    void value(const std::string& v);
    void value(const char* v);
    void value(bool v);
    void value_uint(std::uint64_t v);
    void value_int(std::int64_t v);
    void null();

    void key_value(const std::string& name, double v) { key(name); value(v); }
    void key_value(const std::string& name, const std::string& v) { key(name); value(v); }
    void key_value(const std::string& name, const char* v) { key(name); value(v); }
    void key_value(const std::string& name, bool v) { key(name); value(v); }
    void key_value_uint(const std::string& name, std::uint64_t v) { key(name); value_uint(v); }
    void key_value_int(const std::string& name, std::int64_t v) { key(name); value_int(v); }

    void value_array(const std::vector<double>& values);

    const std::string& str() const { return out_; }

private:
    void separator();
    void append_escaped(const std::string& s);

    std::string out_;
    // true when the next value/key at the current depth needs a comma
    std::vector<bool> need_comma_;
    bool pending_key_ = false;
};

} // namespace cvest

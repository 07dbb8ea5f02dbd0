#pragma once

#include <cstdint>
#include <fstream>
#include <string>
#include <string_view>
#include <vector>

namespace roughn {

/// 17 significant digits, '.' separator, locale independent.
std::string format_real(double v);

/// Small CSV writer with fixed numeric formatting.
class csv_writer {
public:
    /// Opens for truncation, or for appending after truncating to `resume_offset`.
    explicit csv_writer(const std::string& path, std::uint64_t resume_offset = 0,
                        bool resume = false);

    void header(std::initializer_list<std::string_view> cols);
    csv_writer& col(double v);
    csv_writer& col(std::int64_t v);
    csv_writer& col(std::uint64_t v);
    csv_writer& col(int v) { return col(static_cast<std::int64_t>(v)); }
    csv_writer& col(std::string_view v);
    void end_row();

    std::uint64_t offset();
    void flush();

private:
    std::ofstream os_;
    std::string path_;
    bool first_ = true;
};

void write_text_file(const std::string& path, const std::string& content);

} // namespace roughn

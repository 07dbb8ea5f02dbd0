#include "roughn/report.hpp"

#include <filesystem>

#include <fmt/format.h>

#include "roughn/errors.hpp"

namespace roughn {

std::string format_real(double v) { return fmt::format("{:.17g}", v); }

csv_writer::csv_writer(const std::string& path, std::uint64_t resume_offset, bool resume)
    : path_(path) {
    if (resume) {
        std::error_code ec;
        const auto size = std::filesystem::file_size(path, ec);
        if (ec || size < resume_offset)
            fail(errc::io_error, "cannot resume " + path + ": file shorter than checkpoint");
        std::filesystem::resize_file(path, resume_offset, ec);
        if (ec) fail(errc::io_error, "cannot truncate " + path);
        os_.open(path, std::ios::binary | std::ios::app);
    } else {
        os_.open(path, std::ios::binary | std::ios::trunc);
    }
    if (!os_) fail(errc::io_error, "cannot open " + path + " for writing");
}

void csv_writer::header(std::initializer_list<std::string_view> cols) {
    for (auto c : cols) col(c);
    end_row();
}

csv_writer& csv_writer::col(double v) { return col(std::string_view(format_real(v))); }

csv_writer& csv_writer::col(std::int64_t v) { return col(std::string_view(std::to_string(v))); }

csv_writer& csv_writer::col(std::uint64_t v) { return col(std::string_view(std::to_string(v))); }

csv_writer& csv_writer::col(std::string_view v) {
    if (!first_) os_.put(',');
    os_.write(v.data(), static_cast<std::streamsize>(v.size()));
    first_ = false;
    return *this;
}

void csv_writer::end_row() {
    os_.put('\n');
    first_ = true;
    if (!os_) fail(errc::io_error, "write failed: " + path_);
}

std::uint64_t csv_writer::offset() {
    os_.flush();
    return static_cast<std::uint64_t>(os_.tellp());
}

void csv_writer::flush() {
    os_.flush();
    if (!os_) fail(errc::io_error, "flush failed: " + path_);
}

void write_text_file(const std::string& path, const std::string& content) {
    std::ofstream os(path, std::ios::binary | std::ios::trunc);
    if (!os) fail(errc::io_error, "cannot open " + path + " for writing");
    os << content;
    if (!os) fail(errc::io_error, "write failed: " + path);
}

} // namespace roughn

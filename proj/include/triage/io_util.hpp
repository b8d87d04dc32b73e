#pragma once

#include <cstdint>
#include <filesystem>
#include <string>
#include <string_view>

namespace triage::io {

std::string read_file(const std::filesystem::path& path);
std::string read_stream(std::istream& in);

// temp file in the target directory + rename, so readers never see a torn file
void write_file_atomic(const std::filesystem::path& path, std::string_view content);

std::uint64_t fnv1a64(std::string_view data);
std::string to_hex(std::uint64_t value);

// RAII single-writer lock: creates <path>.lock exclusively, removes it on scope exit.
class FileLock {
public:
    explicit FileLock(const std::filesystem::path& target);
    ~FileLock();
    FileLock(const FileLock&) = delete;
    FileLock& operator=(const FileLock&) = delete;

private:
    std::filesystem::path lock_path_;
};

} // namespace triage::io

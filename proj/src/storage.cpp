#include "phrl/storage.hpp"

#include <fstream>
#include <sstream>
#include <stdexcept>

namespace phrl {

LogContents split_log(const std::string& bytes) {
    LogContents out;
    std::size_t start = 0;
    while (start < bytes.size()) {
        const auto nl = bytes.find('\n', start);
        if (nl == std::string::npos) {
            out.truncated_tail = true;
            break;
        }
        if (nl > start) out.lines.push_back(bytes.substr(start, nl - start));
        start = nl + 1;
    }
    return out;
}

FileBlobStore::FileBlobStore(std::filesystem::path root) : root_(std::move(root)) {
    std::filesystem::create_directories(root_);
}

std::filesystem::path FileBlobStore::path_of(const std::string& name) const {
    if (name.empty() || name.find("..") != std::string::npos || name.front() == '/')
        throw std::invalid_argument("invalid blob name: " + name);
    return root_ / name;
}

void FileBlobStore::append_line(const std::string& log, const std::string& line) {
    std::lock_guard lock(mu_);
    std::ofstream out(path_of(log), std::ios::app | std::ios::binary);
    out << line << '\n';
    out.flush();
    if (!out) throw std::runtime_error("append failed: " + path_of(log).string());
}

LogContents FileBlobStore::read_log(const std::string& log) const {
    std::lock_guard lock(mu_);
    std::ifstream in(path_of(log), std::ios::binary);
    if (!in) return {};
    std::ostringstream ss;
    ss << in.rdbuf();
    return split_log(ss.str());
}

bool FileBlobStore::drop_torn_tail(const std::string& log) {
    std::lock_guard lock(mu_);
    const auto path = path_of(log);
    std::string bytes;
    {
        std::ifstream in(path, std::ios::binary);
        if (!in) return false;
        std::ostringstream ss;
        ss << in.rdbuf();
        bytes = ss.str();
    }
    if (bytes.empty() || bytes.back() == '\n') return false;
    const auto nl = bytes.rfind('\n');
    bytes.resize(nl == std::string::npos ? 0 : nl + 1);
    auto tmp = path;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        out << bytes;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, path);
    return true;
}

void FileBlobStore::put(const std::string& name, const std::string& content) {
    std::lock_guard lock(mu_);
    const auto target = path_of(name);
    auto tmp = target;
    tmp += ".tmp";
    {
        std::ofstream out(tmp, std::ios::trunc | std::ios::binary);
        out << content;
        out.flush();
        if (!out) throw std::runtime_error("write failed: " + tmp.string());
    }
    std::filesystem::rename(tmp, target);
}

std::optional<std::string> FileBlobStore::get(const std::string& name) const {
    std::lock_guard lock(mu_);
    std::ifstream in(path_of(name), std::ios::binary);
    if (!in) return std::nullopt;
    std::ostringstream ss;
    ss << in.rdbuf();
    return ss.str();
}

void MemoryBlobStore::append_line(const std::string& log, const std::string& line) {
    std::lock_guard lock(mu_);
    logs_[log] += line;
    logs_[log] += '\n';
}

void MemoryBlobStore::append_raw(const std::string& log, const std::string& bytes) {
    std::lock_guard lock(mu_);
    logs_[log] += bytes;
}

LogContents MemoryBlobStore::read_log(const std::string& log) const {
    std::lock_guard lock(mu_);
    auto it = logs_.find(log);
    return it == logs_.end() ? LogContents{} : split_log(it->second);
}

bool MemoryBlobStore::drop_torn_tail(const std::string& log) {
    std::lock_guard lock(mu_);
    auto it = logs_.find(log);
    if (it == logs_.end() || it->second.empty() || it->second.back() == '\n') return false;
    const auto nl = it->second.rfind('\n');
    it->second.resize(nl == std::string::npos ? 0 : nl + 1);
    return true;
}

void MemoryBlobStore::put(const std::string& name, const std::string& content) {
    std::lock_guard lock(mu_);
    blobs_[name] = content;
}

std::optional<std::string> MemoryBlobStore::get(const std::string& name) const {
    std::lock_guard lock(mu_);
    auto it = blobs_.find(name);
    if (it == blobs_.end()) return std::nullopt;
    return it->second;
}

}  // namespace phrl

#pragma once

// Pluggable persistence: append-only line logs and atomically replaced
// snapshot blobs, on the local filesystem or in memory.

#include <filesystem>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

namespace phrl {

struct LogContents {
    std::vector<std::string> lines;
    /// A trailing fragment without newline (torn write) was dropped.
    bool truncated_tail = false;
};

class BlobStore {
public:
    virtual ~BlobStore() = default;

    /// Appends one line; the newline is added here.
    virtual void append_line(const std::string& log, const std::string& line) = 0;
    virtual LogContents read_log(const std::string& log) const = 0;
    /// Removes a torn trailing fragment so later appends start on a fresh line.
    /// Returns true if something was removed.
    virtual bool drop_torn_tail(const std::string& log) = 0;

    /// Readers observe the old or the new content, never a mix.
    virtual void put(const std::string& name, const std::string& content) = 0;
    virtual std::optional<std::string> get(const std::string& name) const = 0;
};

/// One file per log / blob under `root`; put() writes a temporary file and renames it.
class FileBlobStore : public BlobStore {
public:
    explicit FileBlobStore(std::filesystem::path root);

    void append_line(const std::string& log, const std::string& line) override;
    LogContents read_log(const std::string& log) const override;
    bool drop_torn_tail(const std::string& log) override;
    void put(const std::string& name, const std::string& content) override;
    std::optional<std::string> get(const std::string& name) const override;

    const std::filesystem::path& root() const { return root_; }

private:
    std::filesystem::path path_of(const std::string& name) const;

    std::filesystem::path root_;
    mutable std::mutex mu_;
};

class MemoryBlobStore : public BlobStore {
public:
    void append_line(const std::string& log, const std::string& line) override;
    LogContents read_log(const std::string& log) const override;
    bool drop_torn_tail(const std::string& log) override;
    void put(const std::string& name, const std::string& content) override;
    std::optional<std::string> get(const std::string& name) const override;

    /// Raw bytes of a log, for tests that simulate torn writes.
    void append_raw(const std::string& log, const std::string& bytes);

private:
    mutable std::mutex mu_;
    std::map<std::string, std::string> logs_;
    std::map<std::string, std::string> blobs_;
};

/// Splits on '\n'; a final fragment without newline is reported as truncated.
LogContents split_log(const std::string& bytes);

}  // namespace phrl

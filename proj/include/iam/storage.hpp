#pragma once

#include <filesystem>
#include <map>
#include <mutex>
#include <optional>
#include <span>
#include <string>
#include <vector>

namespace iam {

struct FileWrite {
  enum class Mode { kAppend, kReplace };

  std::string path;  // relative, '/'-separated, e.g. "kb/users.tsv"
  std::string content;
  Mode mode = Mode::kAppend;
};

// Flat namespace of text files. The knowledge base is the only writer; it
// hands over every mutation of one logical commit in a single apply().
class Storage {
 public:
  virtual ~Storage() = default;

  virtual void apply(std::span<const FileWrite> writes) = 0;
  virtual std::optional<std::string> read(const std::string& path) const = 0;
  // Every file path currently held, sorted.
  virtual std::vector<std::string> list() const = 0;
};

class MemoryStorage final : public Storage {
 public:
  void apply(std::span<const FileWrite> writes) override;
  std::optional<std::string> read(const std::string& path) const override;
  std::vector<std::string> list() const override;

  std::map<std::string, std::string> files() const;

 private:
  mutable std::mutex mutex_;
  std::map<std::string, std::string> files_;
};

// Files under a root directory. apply() holds an exclusive flock(2) on
// <root>/.lock so a CLI and a running gateway never interleave within a
// record; replacements go through a temporary file and rename(2).
class DirectoryStorage final : public Storage {
 public:
  explicit DirectoryStorage(std::filesystem::path root);

  void apply(std::span<const FileWrite> writes) override;
  std::optional<std::string> read(const std::string& path) const override;
  std::vector<std::string> list() const override;

  const std::filesystem::path& root() const { return root_; }

 private:
  std::filesystem::path root_;
  std::mutex mutex_;
};

}  // namespace iam

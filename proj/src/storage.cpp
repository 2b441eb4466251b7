#include "iam/storage.hpp"

#include <fcntl.h>
#include <sys/file.h>
#include <unistd.h>

#include <algorithm>
#include <fstream>
#include <sstream>

#include "iam/error.hpp"

namespace iam {

namespace fs = std::filesystem;

void MemoryStorage::apply(std::span<const FileWrite> writes) {
  std::lock_guard lock(mutex_);
  for (const auto& w : writes) {
    if (w.mode == FileWrite::Mode::kReplace) {
      files_[w.path] = w.content;
    } else {
      files_[w.path] += w.content;
    }
  }
}

std::optional<std::string> MemoryStorage::read(const std::string& path) const {
  std::lock_guard lock(mutex_);
  auto it = files_.find(path);
  if (it == files_.end()) return std::nullopt;
  return it->second;
}

std::vector<std::string> MemoryStorage::list() const {
  std::lock_guard lock(mutex_);
  std::vector<std::string> out;
  out.reserve(files_.size());
  for (const auto& [path, _] : files_) out.push_back(path);
  return out;
}

std::map<std::string, std::string> MemoryStorage::files() const {
  std::lock_guard lock(mutex_);
  return files_;
}

// ---------------------------------------------------------------------------

namespace {

class FileLock {
 public:
  explicit FileLock(const fs::path& path) {
    fd_ = ::open(path.c_str(), O_RDWR | O_CREAT | O_CLOEXEC, 0644);
    if (fd_ < 0 || ::flock(fd_, LOCK_EX) != 0) {
      if (fd_ >= 0) ::close(fd_);
      throw IamError(ErrorCode::kStorageFailure, "cannot lock " + path.string());
    }
  }
  ~FileLock() {
    ::flock(fd_, LOCK_UN);
    ::close(fd_);
  }
  FileLock(const FileLock&) = delete;
  FileLock& operator=(const FileLock&) = delete;

 private:
  int fd_ = -1;
};

}  // namespace

DirectoryStorage::DirectoryStorage(fs::path root) : root_(std::move(root)) {
  std::error_code ec;
  fs::create_directories(root_, ec);
  if (ec) throw IamError(ErrorCode::kStorageFailure, "cannot create " + root_.string());
}

void DirectoryStorage::apply(std::span<const FileWrite> writes) {
  for (const auto& w : writes) {
    const fs::path rel(w.path);
    const bool escapes = std::any_of(rel.begin(), rel.end(), [](const fs::path& part) { return part == ".."; });
    if (w.path.empty() || rel.is_absolute() || escapes) {
      throw IamError(ErrorCode::kStorageFailure, "path outside the store: " + w.path);
    }
  }
  std::lock_guard guard(mutex_);
  FileLock lock(root_ / ".lock");
  for (const auto& w : writes) {
    const fs::path target = root_ / w.path;
    std::error_code ec;
    fs::create_directories(target.parent_path(), ec);
    if (ec) throw IamError(ErrorCode::kStorageFailure, "cannot create " + target.parent_path().string());

    if (w.mode == FileWrite::Mode::kAppend) {
      std::ofstream out(target, std::ios::binary | std::ios::app);
      out << w.content;
      out.flush();
      if (!out) throw IamError(ErrorCode::kStorageFailure, "write failed: " + target.string());
    } else {
      fs::path tmp = target;
      tmp += ".tmp";
      {
        std::ofstream out(tmp, std::ios::binary | std::ios::trunc);
        out << w.content;
        out.flush();
        if (!out) throw IamError(ErrorCode::kStorageFailure, "write failed: " + tmp.string());
      }
      fs::rename(tmp, target, ec);
      if (ec) throw IamError(ErrorCode::kStorageFailure, "rename failed: " + target.string());
    }
  }
}

std::optional<std::string> DirectoryStorage::read(const std::string& path) const {
  std::ifstream in(root_ / path, std::ios::binary);
  if (!in) return std::nullopt;
  std::ostringstream ss;
  ss << in.rdbuf();
  return ss.str();
}

std::vector<std::string> DirectoryStorage::list() const {
  std::vector<std::string> out;
  if (!fs::exists(root_)) return out;
  for (const auto& entry : fs::recursive_directory_iterator(root_)) {
    if (!entry.is_regular_file()) continue;
    const auto rel = fs::relative(entry.path(), root_).generic_string();
    if (rel == ".lock" || rel.ends_with(".tmp")) continue;
    out.push_back(rel);
  }
  std::sort(out.begin(), out.end());
  return out;
}

}  // namespace iam

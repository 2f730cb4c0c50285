#pragma once

#include <cstdint>
#include <filesystem>
#include <functional>
#include <map>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <string_view>
#include <vector>

#include "epigraph/error.hpp"
#include "epigraph/imaging.hpp"
#include "epigraph/segment.hpp"

namespace epigraph::label {

class NotFoundError : public Error {
 public:
  using Error::Error;
};

/// No session is loaded, or the request conflicts with the session state.
class ConflictError : public Error {
 public:
  using Error::Error;
};

enum class TaskKind { Kernel, Segment };

std::string_view to_string(TaskKind k);
TaskKind parse_task_kind(std::string_view s);

struct LabelTask {
  std::string id;
  TaskKind kind = TaskKind::Kernel;
  Rect rect;
  std::optional<double> mcc;  // kernels only
};

struct LabelRecord {
  std::string id;
  TaskKind kind = TaskKind::Kernel;
  std::string label;
  std::string timestamp;
};

/// Append-only CSV journal "id,kind,label,timestamp". Reads resolve to the
/// latest record per id. Every append is flushed and fsync'ed before returning.
class LabelStore {
 public:
  explicit LabelStore(std::filesystem::path journal);

  const std::filesystem::path& path() const { return path_; }
  void append(const LabelRecord& rec);
  const std::vector<LabelRecord>& history() const { return history_; }
  const std::map<std::string, LabelRecord>& latest() const { return latest_; }

 private:
  std::filesystem::path path_;
  std::vector<LabelRecord> history_;
  std::map<std::string, LabelRecord> latest_;
};

struct SessionConfig {
  std::filesystem::path image = "image.png";  // relative to the session dir
  int levels = 16;
  Size kernel{20, 20};
  WindowConfig window;
  std::vector<TaskKind> kinds{TaskKind::Kernel, TaskKind::Segment};
};

/// Reads "<dir>/session.json" when present; defaults otherwise.
SessionConfig load_session_config(const std::filesystem::path& dir);
void save_session_config(const SessionConfig& cfg, const std::filesystem::path& dir);

struct Session {
  std::filesystem::path dir;
  SessionConfig config;
  QuantizedImage image;
  std::vector<LabelTask> tasks;  // kernels first, then segments, each in lattice order
};

/// Loads the image, tiles kernels (computing their MCC) and windows.
Session open_session(const std::filesystem::path& dir);
Session make_session(std::filesystem::path dir, const SessionConfig& cfg, QuantizedImage image);

enum class StatusFilter { Unlabeled, Labeled, All };
StatusFilter parse_status_filter(std::string_view s);

struct TaskSummary {
  LabelTask task;
  std::optional<std::string> label;
};

struct TaskPage {
  std::size_t total = 0;  // matching tasks across all pages
  std::vector<TaskSummary> tasks;
};

struct Progress {
  std::size_t total = 0;
  std::size_t labeled = 0;
  std::map<std::string, std::size_t> by_class;
};

/// Thread-safe front end over one session and its label journal. Methods throw
/// ConflictError while no session is loaded.
class LabelService {
 public:
  LabelService() = default;
  explicit LabelService(Session session);

  void load(Session session);
  bool has_session() const;

  TaskPage list(TaskKind kind, StatusFilter status = StatusFilter::Unlabeled,
                std::size_t page = 0, std::size_t page_size = 0) const;
  /// Persists, then returns the stored record.
  LabelRecord submit(std::string_view id, std::string_view label);
  Progress progress() const;
  /// Kernels: "kernel_id,mcc,class". Segments: "segment_id,label". Latest labels only.
  std::string export_csv(TaskKind kind) const;
  std::vector<std::uint8_t> task_png(std::string_view id) const;

  /// Test hook for timestamps.
  void set_clock(std::function<std::string()> clock) { clock_ = std::move(clock); }

 private:
  const LabelTask& find(std::string_view id) const;
  void require_session() const;

  mutable std::mutex mutex_;
  std::optional<Session> session_;
  std::unique_ptr<LabelStore> store_;
  std::map<std::string, std::size_t, std::less<>> index_;
  std::function<std::string()> clock_;
};

struct ServerOptions {
  std::string host = "127.0.0.1";
  int port = 8080;  // 0 picks a free port
  std::optional<std::filesystem::path> ui_dir;
};

/// HTTP front end:
///   GET  /api/tasks?kind=&status=&page=&page_size=
///   GET  /api/tasks/{id}/image
///   POST /api/tasks/{id}/label   {"label": "..."}
///   GET  /api/progress
///   GET  /api/export?kind=
class LabelServer {
 public:
  LabelServer(LabelService& service, ServerOptions options);
  ~LabelServer();
  LabelServer(const LabelServer&) = delete;
  LabelServer& operator=(const LabelServer&) = delete;

  /// Binds and serves on a background thread; returns the bound port.
  int start();
  /// Binds and serves on the calling thread until stop().
  void run();
  void stop();

 private:
  struct Impl;
  std::unique_ptr<Impl> impl_;
};

}  // namespace epigraph::label

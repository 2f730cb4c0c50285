#include "epigraph/label_api.hpp"

#include <fcntl.h>
#include <unistd.h>

#include <chrono>
#include <ctime>
#include <fstream>
#include <sstream>

#include <fmt/format.h>

#include "csv.hpp"
#include "epigraph/denoise.hpp"
#include "epigraph/haralick.hpp"
#include "json.hpp"

namespace epigraph::label {

namespace fs = std::filesystem;

std::string_view to_string(TaskKind k) { return k == TaskKind::Kernel ? "kernel" : "segment"; }

TaskKind parse_task_kind(std::string_view s) {
  if (s == "kernel") return TaskKind::Kernel;
  if (s == "segment") return TaskKind::Segment;
  throw ConfigError(fmt::format("unknown task kind '{}' (kernel or segment)", s));
}

StatusFilter parse_status_filter(std::string_view s) {
  if (s == "unlabeled") return StatusFilter::Unlabeled;
  if (s == "labeled") return StatusFilter::Labeled;
  if (s == "all") return StatusFilter::All;
  throw ConfigError(fmt::format("unknown status '{}' (unlabeled, labeled or all)", s));
}

// ---------------------------------------------------------------------------

LabelStore::LabelStore(fs::path journal) : path_(std::move(journal)) {
  if (!fs::exists(path_)) return;
  std::ifstream in(path_, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read label journal '{}'", path_.string()));
  for (auto& f : csv::read(in, {"id", "kind", "label", "timestamp"})) {
    LabelRecord rec{f[0], parse_task_kind(f[1]), f[2], f[3]};
    latest_[rec.id] = rec;
    history_.push_back(std::move(rec));
  }
}

void LabelStore::append(const LabelRecord& rec) {
  for (const std::string* s : {&rec.id, &rec.label, &rec.timestamp}) {
    if (s->find_first_of(",\n\r") != std::string::npos) {
      throw ConfigError(fmt::format("label field '{}' contains a separator", *s));
    }
  }
  const bool fresh = !fs::exists(path_) || fs::file_size(path_) == 0;
  std::string line;
  if (fresh) line = "id,kind,label,timestamp\n";
  line += fmt::format("{},{},{},{}\n", rec.id, to_string(rec.kind), rec.label, rec.timestamp);

  const int fd = ::open(path_.c_str(), O_WRONLY | O_CREAT | O_APPEND, 0644);
  if (fd < 0) throw IoError(fmt::format("cannot open label journal '{}'", path_.string()));
  std::size_t written = 0;
  while (written < line.size()) {
    const ssize_t n = ::write(fd, line.data() + written, line.size() - written);
    if (n <= 0) {
      ::close(fd);
      throw IoError(fmt::format("cannot append to label journal '{}'", path_.string()));
    }
    written += static_cast<std::size_t>(n);
  }
  const bool synced = ::fsync(fd) == 0;
  ::close(fd);
  if (!synced) throw IoError(fmt::format("cannot sync label journal '{}'", path_.string()));

  latest_[rec.id] = rec;
  history_.push_back(rec);
}

// ---------------------------------------------------------------------------

SessionConfig load_session_config(const fs::path& dir) {
  SessionConfig cfg;
  const fs::path file = dir / "session.json";
  if (!fs::exists(file)) return cfg;
  std::ifstream in(file, std::ios::binary);
  if (!in) throw IoError(fmt::format("cannot read '{}'", file.string()));
  try {
    const auto j = nlohmann::json::parse(in);
    cfg.image = j.value("image", cfg.image.string());
    cfg.levels = j.value("levels", cfg.levels);
    if (j.contains("kernel")) cfg.kernel = {j["kernel"].at(0).get<int>(), j["kernel"].at(1).get<int>()};
    if (j.contains("window")) {
      cfg.window = WindowConfig::with_half_stride({j["window"].at(0).get<int>(), j["window"].at(1).get<int>()});
    }
    if (j.contains("stride")) cfg.window.stride = {j["stride"].at(0).get<int>(), j["stride"].at(1).get<int>()};
    if (j.contains("kinds")) {
      cfg.kinds.clear();
      for (const auto& k : j["kinds"]) cfg.kinds.push_back(parse_task_kind(k.get<std::string>()));
    }
  } catch (const nlohmann::json::exception& e) {
    throw FormatError(fmt::format("malformed '{}': {}", file.string(), e.what()));
  }
  return cfg;
}

void save_session_config(const SessionConfig& cfg, const fs::path& dir) {
  nlohmann::ordered_json j;
  j["image"] = cfg.image.string();
  j["levels"] = cfg.levels;
  j["kernel"] = {cfg.kernel.w, cfg.kernel.h};
  j["window"] = {cfg.window.window.w, cfg.window.window.h};
  j["stride"] = {cfg.window.stride.w, cfg.window.stride.h};
  j["kinds"] = nlohmann::ordered_json::array();
  for (TaskKind k : cfg.kinds) j["kinds"].push_back(std::string(to_string(k)));
  std::ofstream out(dir / "session.json", std::ios::binary);
  if (!out) throw IoError(fmt::format("cannot write '{}'", (dir / "session.json").string()));
  out << j.dump(2) << '\n';
}

Session make_session(fs::path dir, const SessionConfig& cfg, QuantizedImage image) {
  Session s{std::move(dir), cfg, std::move(image), {}};
  auto has = [&](TaskKind k) { return std::find(cfg.kinds.begin(), cfg.kinds.end(), k) != cfg.kinds.end(); };
  if (has(TaskKind::Kernel)) {
    for (const Kernel& k : tile_kernels(s.image, cfg.kernel, cfg.kernel)) {
      s.tasks.push_back({k.id, TaskKind::Kernel, k.rect(), kernel_features(k).maximal_correlation});
    }
  }
  if (has(TaskKind::Segment)) {
    for (const Segment& seg : slide_windows(s.image, cfg.window)) {
      s.tasks.push_back({seg.id, TaskKind::Segment, seg.rect(), std::nullopt});
    }
  }
  return s;
}

Session open_session(const fs::path& dir) {
  if (!fs::is_directory(dir)) throw IoError(fmt::format("session directory '{}' does not exist", dir.string()));
  SessionConfig cfg = load_session_config(dir);
  QuantizedImage image = load_quantized(dir / cfg.image, cfg.levels);
  return make_session(dir, cfg, std::move(image));
}

// ---------------------------------------------------------------------------

namespace {

std::string utc_now() {
  const auto now = std::chrono::system_clock::now();
  const std::time_t t = std::chrono::system_clock::to_time_t(now);
  std::tm tm{};
  gmtime_r(&t, &tm);
  const auto ms = std::chrono::duration_cast<std::chrono::milliseconds>(now.time_since_epoch()).count() % 1000;
  return fmt::format("{:04}-{:02}-{:02}T{:02}:{:02}:{:02}.{:03}Z", tm.tm_year + 1900, tm.tm_mon + 1,
                     tm.tm_mday, tm.tm_hour, tm.tm_min, tm.tm_sec, ms);
}

std::string canonical_label(TaskKind kind, std::string_view label) {
  try {
    if (kind == TaskKind::Kernel) return std::string(to_string(parse_kernel_class(label)));
    return std::string(to_string(parse_segment_label(label)));
  } catch (const ConfigError&) {
    throw ConfigError(fmt::format("label '{}' is not valid for a {} task", label, to_string(kind)));
  }
}

}  // namespace

LabelService::LabelService(Session session) { load(std::move(session)); }

void LabelService::load(Session session) {
  auto store = std::make_unique<LabelStore>(session.dir / "labels.csv");
  std::map<std::string, std::size_t, std::less<>> index;
  for (std::size_t i = 0; i < session.tasks.size(); ++i) {
    if (!index.emplace(session.tasks[i].id, i).second) {
      throw ConfigError(fmt::format("duplicate task id '{}'", session.tasks[i].id));
    }
  }
  std::lock_guard lock(mutex_);
  session_ = std::move(session);
  store_ = std::move(store);
  index_ = std::move(index);
}

bool LabelService::has_session() const {
  std::lock_guard lock(mutex_);
  return session_.has_value();
}

void LabelService::require_session() const {
  if (!session_) throw ConflictError("no labeling session is loaded");
}

const LabelTask& LabelService::find(std::string_view id) const {
  auto it = index_.find(id);
  if (it == index_.end()) throw NotFoundError(fmt::format("unknown task '{}'", id));
  return session_->tasks[it->second];
}

TaskPage LabelService::list(TaskKind kind, StatusFilter status, std::size_t page,
                            std::size_t page_size) const {
  std::lock_guard lock(mutex_);
  require_session();
  TaskPage out;
  const std::size_t begin = page * page_size;
  for (const LabelTask& t : session_->tasks) {
    if (t.kind != kind) continue;
    auto it = store_->latest().find(t.id);
    const bool labeled = it != store_->latest().end();
    if ((status == StatusFilter::Unlabeled && labeled) || (status == StatusFilter::Labeled && !labeled)) {
      continue;
    }
    const std::size_t position = out.total++;
    if (page_size == 0 || (position >= begin && position < begin + page_size)) {
      out.tasks.push_back({t, labeled ? std::optional(it->second.label) : std::nullopt});
    }
  }
  return out;
}

LabelRecord LabelService::submit(std::string_view id, std::string_view label) {
  std::lock_guard lock(mutex_);
  require_session();
  const LabelTask& task = find(id);
  LabelRecord rec{task.id, task.kind, canonical_label(task.kind, label), clock_ ? clock_() : utc_now()};
  store_->append(rec);
  return rec;
}

Progress LabelService::progress() const {
  std::lock_guard lock(mutex_);
  require_session();
  Progress p;
  p.total = session_->tasks.size();
  for (const LabelTask& t : session_->tasks) {
    auto it = store_->latest().find(t.id);
    if (it == store_->latest().end()) continue;
    ++p.labeled;
    ++p.by_class[it->second.label];
  }
  return p;
}

std::string LabelService::export_csv(TaskKind kind) const {
  std::lock_guard lock(mutex_);
  require_session();
  std::ostringstream out;
  out << (kind == TaskKind::Kernel ? "kernel_id,mcc,class\n" : "segment_id,label\n");
  std::size_t rows = 0;
  for (const LabelTask& t : session_->tasks) {
    if (t.kind != kind) continue;
    auto it = store_->latest().find(t.id);
    if (it == store_->latest().end()) continue;
    if (kind == TaskKind::Kernel) {
      out << fmt::format("{},{:.17g},{}\n", t.id, t.mcc.value_or(0.0), it->second.label);
    } else {
      out << t.id << ',' << it->second.label << '\n';
    }
    ++rows;
  }
  if (rows == 0) throw ConflictError(fmt::format("no {} tasks are labeled yet", to_string(kind)));
  return out.str();
}

std::vector<std::uint8_t> LabelService::task_png(std::string_view id) const {
  std::lock_guard lock(mutex_);
  require_session();
  const LabelTask& t = find(id);
  const Kernel k = extract_kernel(session_->image, t.rect);
  return encode_png(QuantizedImage(k.size.w, k.size.h, k.levels, k.pixels));
}

}  // namespace epigraph::label

// Bridge to a model living in a child process.
//
// Protocol: one JSON object per line on the child's stdin, one JSON reply per
// line on its stdout, strictly in request order.
//
//   {"cmd":"handshake"}                                -> {"ok":true,"capabilities":[...]}
//   {"cmd":"train","samples":[...],"max_epochs":n,"epsilon":e}
//                                                      -> {"epoch_losses":[...]}
//   {"cmd":"fine_tune","samples":[...],"epochs":n}     -> {"epoch_losses":[...]}
//   {"cmd":"predict","code":"..."}                     -> {"p":0.87}
//   {"cmd":"snapshot"}                                 -> {"state":"<base64>"}
//   {"cmd":"restore","state":"<base64>"}               -> {"ok":true}
//
// Samples are {"id","code","label"} objects. Any reply carrying an "error"
// member fails the request. Closing the child's stdin asks it to exit.

#include <fcntl.h>
#include <signal.h>
#include <sys/wait.h>
#include <unistd.h>

#include <algorithm>
#include <cerrno>
#include <chrono>
#include <cstring>
#include <mutex>
#include <thread>

#include "vcl/model.hpp"

namespace vcl {

using nlohmann::json;

namespace {

std::vector<std::string> split_command(const std::string& command) {
  std::vector<std::string> args;
  std::string cur;
  bool in_token = false;
  char quote = 0;
  for (char c : command) {
    if (quote) {
      if (c == quote) {
        quote = 0;
      } else {
        cur += c;
      }
    } else if (c == '\'' || c == '"') {
      quote = c;
      in_token = true;
    } else if (std::isspace(static_cast<unsigned char>(c))) {
      if (in_token) args.push_back(std::move(cur));
      cur.clear();
      in_token = false;
    } else {
      cur += c;
      in_token = true;
    }
  }
  if (quote) throw ConfigError("unterminated quote in external command: " + command);
  if (in_token) args.push_back(std::move(cur));
  return args;
}

json samples_json(const Dataset& data) {
  json arr = json::array();
  for (const auto& s : data) arr.push_back({{"id", s.id}, {"code", s.code}, {"label", s.label}});
  return arr;
}

class ExternalClassifier final : public Classifier {
 public:
  explicit ExternalClassifier(const ClassifierSpec& spec) : spec_(spec) {
    launch();
    try {
      const auto reply = request({{"cmd", "handshake"}});
      if (!reply.value("ok", false)) throw BridgeError("external model rejected the handshake");
      for (const auto& c : reply.value("capabilities", json::array()))
        if (c.is_string()) capabilities_.push_back(c.get<std::string>());
    } catch (...) {
      shutdown();
      throw;
    }
  }

  ~ExternalClassifier() override { shutdown(); }

  ExternalClassifier(const ExternalClassifier&) = delete;
  ExternalClassifier& operator=(const ExternalClassifier&) = delete;

  TrainReport train(const Dataset& data, std::size_t max_epochs,
                    const ConvergencePolicy& policy) override {
    if (data.empty()) throw DataError("cannot train on an empty dataset");
    const auto reply = request({{"cmd", "train"},
                                {"samples", samples_json(data)},
                                {"max_epochs", max_epochs},
                                {"epsilon", policy.epsilon}});
    auto report = losses_report(reply);
    const auto n = report.epoch_losses.size();
    if (n == 0 || n > max_epochs)
      throw BridgeError("external model ran " + std::to_string(n) + " epochs (max " +
                        std::to_string(max_epochs) + ")");
    report.converged =
        n >= 2 && policy.converged(report.epoch_losses[n - 2], report.epoch_losses[n - 1]);
    return report;
  }

  TrainReport fine_tune(const Dataset& data, std::size_t epochs) override {
    if (epochs == 0) return {};
    const auto reply =
        request({{"cmd", "fine_tune"}, {"samples", samples_json(data)}, {"epochs", epochs}});
    auto report = losses_report(reply);
    if (report.epochs_run != epochs)
      throw BridgeError("external model fine-tuned " + std::to_string(report.epochs_run) +
                        " epochs, expected " + std::to_string(epochs));
    return report;
  }

  Prediction predict(const FunctionSample& sample) const override {
    const auto reply = request({{"cmd", "predict"}, {"code", sample.code}});
    if (!reply.contains("p") || !reply["p"].is_number())
      throw BridgeError("predict reply lacks a numeric \"p\"");
    const double p = reply["p"].get<double>();
    if (!(p >= 0.0 && p <= 1.0)) throw BridgeError("predicted probability outside [0,1]");
    return {p};
  }

  bool supports_snapshot() const override {
    return std::find(capabilities_.begin(), capabilities_.end(), "snapshot") !=
           capabilities_.end();
  }

  ModelState snapshot() const override {
    if (!supports_snapshot())
      throw UnsupportedError("external model '" + spec_.command + "' does not support snapshot");
    const auto reply = request({{"cmd", "snapshot"}});
    if (!reply.contains("state") || !reply["state"].is_string())
      throw BridgeError("snapshot reply lacks a string \"state\"");
    return {ClassifierKind::External, reply["state"].get<std::string>()};
  }

  void restore(const ModelState& state) override {
    if (!supports_snapshot())
      throw UnsupportedError("external model '" + spec_.command + "' does not support restore");
    if (state.kind != ClassifierKind::External)
      throw ConfigError("cannot restore a reference state into an external model");
    request({{"cmd", "restore"}, {"state", state.data}});
  }

 private:
  static TrainReport losses_report(const json& reply) {
    if (!reply.contains("epoch_losses") || !reply["epoch_losses"].is_array())
      throw BridgeError("reply lacks \"epoch_losses\"");
    TrainReport report;
    for (const auto& l : reply["epoch_losses"]) {
      if (!l.is_number()) throw BridgeError("non-numeric epoch loss");
      report.epoch_losses.push_back(l.get<double>());
    }
    report.epochs_run = report.epoch_losses.size();
    return report;
  }

  void launch() {
    const auto args = split_command(spec_.command);
    if (args.empty()) throw ConfigError("external classifier needs a command");
    int in_pipe[2], out_pipe[2], err_pipe[2];
    if (pipe2(in_pipe, O_CLOEXEC) || pipe2(out_pipe, O_CLOEXEC) || pipe2(err_pipe, O_CLOEXEC))
      throw BridgeError(std::string("pipe: ") + std::strerror(errno));
    std::vector<char*> argv;
    for (const auto& a : args) argv.push_back(const_cast<char*>(a.c_str()));
    argv.push_back(nullptr);

    pid_ = fork();
    if (pid_ < 0) throw BridgeError(std::string("fork: ") + std::strerror(errno));
    if (pid_ == 0) {
      dup2(in_pipe[0], STDIN_FILENO);
      dup2(out_pipe[1], STDOUT_FILENO);
      execvp(argv[0], argv.data());
      const int err = errno;
      [[maybe_unused]] auto n = write(err_pipe[1], &err, sizeof err);
      _exit(127);
    }
    close(in_pipe[0]);
    close(out_pipe[1]);
    close(err_pipe[1]);
    to_child_ = in_pipe[1];
    from_child_ = out_pipe[0];

    int child_errno = 0;
    const auto n = read(err_pipe[0], &child_errno, sizeof child_errno);
    close(err_pipe[0]);
    if (n == static_cast<ssize_t>(sizeof child_errno)) {
      shutdown();
      throw BridgeError("cannot launch external model '" + args[0] +
                        "': " + std::strerror(child_errno));
    }
  }

  void shutdown() noexcept {
    if (to_child_ >= 0) close(to_child_);
    if (from_child_ >= 0) close(from_child_);
    to_child_ = from_child_ = -1;
    if (pid_ > 0) {
      int status = 0;
      for (int i = 0; i < 100; ++i) {
        if (waitpid(pid_, &status, WNOHANG) != 0) {
          pid_ = -1;
          return;
        }
        std::this_thread::sleep_for(std::chrono::milliseconds(10));
      }
      kill(pid_, SIGKILL);
      waitpid(pid_, &status, 0);
      pid_ = -1;
    }
  }

  json request(const json& msg) const {
    std::lock_guard lock(mutex_);
    if (to_child_ < 0) throw BridgeError("external model is not running");
    const std::string line = msg.dump() + "\n";
    std::size_t written = 0;
    while (written < line.size()) {
      const auto n = write(to_child_, line.data() + written, line.size() - written);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw BridgeError("external model closed its input");
      written += static_cast<std::size_t>(n);
    }
    const auto reply_line = read_line();
    json reply;
    try {
      reply = json::parse(reply_line);
    } catch (const json::parse_error& e) {
      throw BridgeError(std::string("malformed reply from external model: ") + e.what());
    }
    if (!reply.is_object()) throw BridgeError("external model reply is not an object");
    if (reply.contains("error"))
      throw BridgeError("external model error: " + reply["error"].dump());
    return reply;
  }

  std::string read_line() const {
    while (true) {
      const auto nl = buffer_.find('\n');
      if (nl != std::string::npos) {
        auto line = buffer_.substr(0, nl);
        buffer_.erase(0, nl + 1);
        return line;
      }
      char chunk[4096];
      const auto n = read(from_child_, chunk, sizeof chunk);
      if (n < 0 && errno == EINTR) continue;
      if (n <= 0) throw BridgeError("external model closed its output");
      buffer_.append(chunk, static_cast<std::size_t>(n));
    }
  }

  ClassifierSpec spec_;
  std::vector<std::string> capabilities_;
  pid_t pid_ = -1;
  int to_child_ = -1;
  int from_child_ = -1;
  mutable std::string buffer_;
  mutable std::mutex mutex_;
};

}  // namespace

std::unique_ptr<Classifier> launch_external_classifier(const ClassifierSpec& spec) {
  // A child that dies mid-request must surface as an error, not kill us.
  signal(SIGPIPE, SIG_IGN);
  return std::make_unique<ExternalClassifier>(spec);
}

}  // namespace vcl

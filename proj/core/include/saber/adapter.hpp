#pragma once

#include <chrono>
#include <cstddef>
#include <memory>
#include <mutex>
#include <optional>
#include <string>
#include <vector>

#include "saber/market_data.hpp"
#include "saber/portfolio.hpp"
#include "saber/subprocess.hpp"
#include "saber/timing.hpp"

namespace saber {

inline constexpr int kProtocolVersion = 1;

enum class SessionState { Init, Ready, Trading, Closed };

std::string_view to_string(SessionState s);

struct AdapterConfig {
  std::vector<std::string> command;
  int protocol_version = kProtocolVersion;
  std::chrono::milliseconds timeout{120'000};
  std::size_t bars_window = 30;
  bool send_texts = false;
};

struct ObserveMessage {
  Date date;
  std::string symbol;
  std::vector<PriceBar> bars;
  std::vector<TextRecord> texts;
  Portfolio portfolio;
};

enum class IncidentKind { MalformedAction, Timeout, BrokenPipe };

std::string_view to_string(IncidentKind k);

struct Incident {
  Date date;
  IncidentKind kind;
  std::string detail;

  friend bool operator==(const Incident&, const Incident&) = default;
};

struct ExitReport {
  std::string agent_name;
  std::optional<int> exit_status;
  /// The agent was gone before `end` could be delivered.
  bool early_exit = false;
  /// The agent ignored `end` and had to be killed.
  bool force_terminated = false;
  std::size_t observes = 0;
  std::size_t actions = 0;
  std::vector<Incident> incidents;
};

// Wire encoding. Unknown keys in inbound messages are ignored.
std::string encode_hello(int protocol_version);
std::string encode_observe(const ObserveMessage& msg);
std::string encode_end();
/// Parses an `action` line. On failure returns nullopt and sets `why`.
std::optional<Signal> decode_action(const std::string& line, std::string& why);

/// One subprocess speaking protocol v1. Exchanges are strictly sequential.
class AdapterSession {
 public:
  /// Spawns the agent and completes the handshake.
  /// Throws SpawnFailure, HandshakeTimeout, VersionMismatch or ProtocolError.
  static std::unique_ptr<AdapterSession> open(const AdapterConfig& config);
  ~AdapterSession();

  /// One observe out, one action in. Faults are logged as incidents and
  /// coerced to HOLD; a timeout or a dead agent closes the session, after
  /// which every call returns HOLD without contacting the agent.
  Signal request_signal(const ObserveMessage& msg);

  /// Sends `end`, reaps the agent (killing it after the timeout) and
  /// reports. Idempotent.
  ExitReport close();

  SessionState state() const { return state_; }
  const std::string& agent_name() const { return report_.agent_name; }
  /// Every line written to the agent, in order.
  const std::vector<std::string>& outbound() const { return outbound_; }

 private:
  explicit AdapterSession(const AdapterConfig& config);
  void fail(Date date, IncidentKind kind, std::string detail);

  AdapterConfig config_;
  std::unique_ptr<Subprocess> process_;
  SessionState state_ = SessionState::Init;
  ExitReport report_;
  std::vector<std::string> outbound_;
  bool closed_ = false;
};

/// Thread-safe collector for session reports produced during a sweep.
class SessionLog {
 public:
  struct Entry {
    std::string strategy;
    std::string symbol;
    Date trade_start;
    ExitReport report;
  };
  void add(Entry e);
  std::vector<Entry> entries() const;

 private:
  mutable std::mutex mutex_;
  std::vector<Entry> entries_;
};

/// Timing strategy backed by an external agent. A session is opened per
/// (symbol, window) in begin_window and closed in end_window.
class AdapterStrategy final : public TimingStrategy {
 public:
  AdapterStrategy(std::string name, AdapterConfig config, std::shared_ptr<SessionLog> log = nullptr);
  ~AdapterStrategy() override;

  std::string name() const override { return name_; }
  void begin_window(const WindowStart& ws) override;
  Signal decide(const DecisionContext& ctx) override;
  void end_window() override;

  /// Builds the observe for a decision; bars and texts are clamped to the view.
  ObserveMessage observe_for(const DecisionContext& ctx) const;

  const std::optional<ExitReport>& last_report() const { return last_report_; }
  /// Outbound transcript of the most recent session.
  const std::vector<std::string>& transcript() const { return transcript_; }

 private:
  std::string name_;
  AdapterConfig config_;
  std::shared_ptr<SessionLog> log_;
  std::unique_ptr<AdapterSession> session_;
  std::string symbol_;
  Date trade_start_;
  std::optional<ExitReport> last_report_;
  std::vector<std::string> transcript_;
};

StrategyFactory adapter_strategy_factory(const std::string& name, const AdapterConfig& config,
                                         std::shared_ptr<SessionLog> log = nullptr);

}  // namespace saber

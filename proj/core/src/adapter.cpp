#include "saber/adapter.hpp"

#include <algorithm>
#include <json.hpp>

#include "saber/error.hpp"

namespace saber {

using nlohmann::json;

std::string_view to_string(SessionState s) {
  switch (s) {
    case SessionState::Init: return "INIT";
    case SessionState::Ready: return "READY";
    case SessionState::Trading: return "TRADING";
    case SessionState::Closed: return "CLOSED";
  }
  return "CLOSED";
}

std::string_view to_string(IncidentKind k) {
  switch (k) {
    case IncidentKind::MalformedAction: return "MalformedAction";
    case IncidentKind::Timeout: return "Timeout";
    case IncidentKind::BrokenPipe: return "BrokenPipe";
  }
  return "MalformedAction";
}

std::string encode_hello(int protocol_version) {
  return json{{"type", "hello"}, {"protocol_version", protocol_version}}.dump();
}

std::string encode_observe(const ObserveMessage& msg) {
  json bars = json::array();
  for (const auto& b : msg.bars) {
    bars.push_back({{"date", b.date.iso()},
                    {"open", b.open},
                    {"high", b.high},
                    {"low", b.low},
                    {"close", b.close},
                    {"adj_close", b.adj_close},
                    {"volume", b.volume}});
  }
  json texts = json::array();
  for (const auto& t : msg.texts) {
    texts.push_back({{"date", t.date.iso()}, {"kind", std::string(to_string(t.kind))}, {"text", t.text}});
  }
  return json{{"type", "observe"},
              {"date", msg.date.iso()},
              {"symbol", msg.symbol},
              {"bars", std::move(bars)},
              {"texts", std::move(texts)},
              {"portfolio",
               {{"position", std::string(to_string(msg.portfolio.position))},
                {"cash", msg.portfolio.cash},
                {"shares", msg.portfolio.shares}}}}
      .dump();
}

std::string encode_end() { return json{{"type", "end"}}.dump(); }

std::optional<Signal> decode_action(const std::string& line, std::string& why) {
  const json msg = json::parse(line, nullptr, false);
  if (msg.is_discarded() || !msg.is_object()) {
    why = "not a JSON object: " + line.substr(0, 80);
    return std::nullopt;
  }
  auto type = msg.find("type");
  if (type == msg.end() || *type != "action") {
    why = "expected type=action";
    return std::nullopt;
  }
  auto sig = msg.find("signal");
  if (sig == msg.end() || !sig->is_number_integer()) {
    why = "signal missing or not an integer";
    return std::nullopt;
  }
  const auto v = sig->get<long long>();
  if (v < -1 || v > 1) {
    why = "signal out of domain: " + std::to_string(v);
    return std::nullopt;
  }
  return static_cast<Signal>(v);
}

// ------------------------------------------------------------------ session

AdapterSession::AdapterSession(const AdapterConfig& config) : config_(config) {}

AdapterSession::~AdapterSession() { close(); }

std::unique_ptr<AdapterSession> AdapterSession::open(const AdapterConfig& config) {
  if (config.timeout.count() <= 0) throw Error(ErrorKind::InvalidParameter, "adapter timeout must be positive");
  std::unique_ptr<AdapterSession> s(new AdapterSession(config));
  s->process_ = std::make_unique<Subprocess>(config.command);

  auto abort = [&](ErrorKind kind, const std::string& why) {
    s->process_->kill();
    s->state_ = SessionState::Closed;
    s->closed_ = true;
    throw Error(kind, why);
  };

  const std::string hello = encode_hello(config.protocol_version);
  s->outbound_.push_back(hello);
  if (!s->process_->write_line(hello, config.timeout)) abort(ErrorKind::SpawnFailure, "agent did not accept hello");

  const auto reply = s->process_->read_line(config.timeout);
  if (reply.status == Subprocess::ReadStatus::Timeout) {
    abort(ErrorKind::HandshakeTimeout, "no hello_ack within " + std::to_string(config.timeout.count()) + " ms");
  }
  if (reply.status == Subprocess::ReadStatus::Eof) abort(ErrorKind::SpawnFailure, "agent exited during handshake");

  const json ack = json::parse(reply.line, nullptr, false);
  if (ack.is_discarded() || !ack.is_object() || ack.value("type", "") != "hello_ack") {
    abort(ErrorKind::ProtocolError, "expected hello_ack, got: " + reply.line.substr(0, 80));
  }
  auto version = ack.find("protocol_version");
  if (version == ack.end() || !version->is_number_integer()) {
    abort(ErrorKind::ProtocolError, "hello_ack without protocol_version");
  }
  if (version->get<long long>() != config.protocol_version) {
    abort(ErrorKind::VersionMismatch, "engine speaks " + std::to_string(config.protocol_version) +
                                          ", agent replied " + std::to_string(version->get<long long>()));
  }
  if (auto name = ack.find("name"); name != ack.end() && name->is_string()) {
    s->report_.agent_name = name->get<std::string>();
  }
  s->state_ = SessionState::Ready;
  return s;
}

void AdapterSession::fail(Date date, IncidentKind kind, std::string detail) {
  report_.incidents.push_back(Incident{date, kind, std::move(detail)});
  if (kind != IncidentKind::MalformedAction) {
    process_->kill();
    state_ = SessionState::Closed;
  }
}

Signal AdapterSession::request_signal(const ObserveMessage& msg) {
  if (state_ != SessionState::Ready && state_ != SessionState::Trading) return Signal::Hold;
  state_ = SessionState::Trading;

  const std::string line = encode_observe(msg);
  outbound_.push_back(line);
  ++report_.observes;
  if (!process_->write_line(line, config_.timeout)) {
    report_.early_exit = true;
    fail(msg.date, IncidentKind::BrokenPipe, "agent stopped reading");
    return Signal::Hold;
  }
  const auto reply = process_->read_line(config_.timeout);
  if (reply.status == Subprocess::ReadStatus::Timeout) {
    fail(msg.date, IncidentKind::Timeout, "no action within " + std::to_string(config_.timeout.count()) + " ms");
    return Signal::Hold;
  }
  if (reply.status == Subprocess::ReadStatus::Eof) {
    report_.early_exit = true;
    fail(msg.date, IncidentKind::BrokenPipe, "agent closed its output");
    return Signal::Hold;
  }
  std::string why;
  const auto signal = decode_action(reply.line, why);
  if (!signal) {
    fail(msg.date, IncidentKind::MalformedAction, why);
    return Signal::Hold;
  }
  ++report_.actions;
  return *signal;
}

ExitReport AdapterSession::close() {
  if (closed_ || !process_) {
    closed_ = true;
    return report_;
  }
  closed_ = true;
  if (state_ != SessionState::Closed) {
    const std::string end = encode_end();
    outbound_.push_back(end);
    if (process_->exited() || !process_->write_line(end, config_.timeout)) report_.early_exit = true;
    process_->close_stdin();
    if (!process_->wait_for(config_.timeout)) {
      process_->kill();
      report_.force_terminated = true;
    }
  }
  state_ = SessionState::Closed;
  report_.exit_status = process_->exit_code();
  return report_;
}

// ------------------------------------------------------------------ log

void SessionLog::add(Entry e) {
  std::lock_guard lock(mutex_);
  entries_.push_back(std::move(e));
}

std::vector<SessionLog::Entry> SessionLog::entries() const {
  std::lock_guard lock(mutex_);
  auto out = entries_;
  std::sort(out.begin(), out.end(), [](const Entry& a, const Entry& b) {
    return std::tie(a.strategy, a.trade_start, a.symbol) < std::tie(b.strategy, b.trade_start, b.symbol);
  });
  return out;
}

// ------------------------------------------------------------------ strategy

AdapterStrategy::AdapterStrategy(std::string name, AdapterConfig config, std::shared_ptr<SessionLog> log)
    : name_(std::move(name)), config_(std::move(config)), log_(std::move(log)) {}

AdapterStrategy::~AdapterStrategy() {
  if (session_) end_window();
}

void AdapterStrategy::begin_window(const WindowStart& ws) {
  if (session_) end_window();
  symbol_ = ws.symbol;
  trade_start_ = ws.trade_start;
  last_report_.reset();
  transcript_.clear();
  session_ = AdapterSession::open(config_);
}

ObserveMessage AdapterStrategy::observe_for(const DecisionContext& ctx) const {
  ObserveMessage msg;
  msg.date = ctx.decision_date;
  msg.symbol = ctx.view.symbol();
  const auto history = ctx.view.history();
  const std::size_t n = std::min(config_.bars_window, history.size());
  msg.bars.assign(history.end() - static_cast<std::ptrdiff_t>(n), history.end());
  if (config_.send_texts) {
    msg.texts = ctx.view.texts();
    if (!msg.bars.empty()) {
      const Date from = msg.bars.front().date;
      std::erase_if(msg.texts, [from](const TextRecord& t) { return t.date < from; });
    }
  }
  msg.portfolio = ctx.portfolio;
  return msg;
}

Signal AdapterStrategy::decide(const DecisionContext& ctx) {
  if (!session_) return Signal::Hold;
  return session_->request_signal(observe_for(ctx));
}

void AdapterStrategy::end_window() {
  if (!session_) return;
  last_report_ = session_->close();
  transcript_ = session_->outbound();
  session_.reset();
  if (log_) log_->add(SessionLog::Entry{name_, symbol_, trade_start_, *last_report_});
}

StrategyFactory adapter_strategy_factory(const std::string& name, const AdapterConfig& config,
                                         std::shared_ptr<SessionLog> log) {
  if (config.command.empty()) throw Error(ErrorKind::InvalidParameter, name + ": adapter command is empty");
  if (config.timeout.count() <= 0) throw Error(ErrorKind::InvalidParameter, name + ": timeout must be positive");
  return [name, config, log] { return std::make_unique<AdapterStrategy>(name, config, log); };
}

}  // namespace saber

// Copyright 2026 The Reachfuzz Authors.
//
// Licensed under the Apache License, Version 2.0 (the "License");
// you may not use this file except in compliance with the License.
// You may obtain a copy of the License at
//
//      https://www.apache.org/licenses/LICENSE-2.0
//
// Unless required by applicable law or agreed to in writing, software
// distributed under the License is distributed on an "AS IS" BASIS,
// WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
// See the License for the specific language governing permissions and
// limitations under the License.

#include "reachfuzz/ir_parser.h"

#include <cctype>
#include <fstream>
#include <map>
#include <set>
#include <sstream>
#include <unordered_map>

#include "reachfuzz/error.h"

namespace reachfuzz {
namespace {

struct Token {
  enum class Kind { kIdent, kInt, kPunct, kEof };
  Kind kind = Kind::kEof;
  std::string text;
  uint64_t int_value = 0;
  int line = 0;
  int column = 0;
};

std::vector<Token> Tokenize(std::string_view src) {
  std::vector<Token> tokens;
  int line = 1;
  int column = 1;
  size_t i = 0;
  auto advance = [&](size_t n) {
    for (size_t k = 0; k < n; ++k, ++i) {
      if (src[i] == '\n') {
        ++line;
        column = 1;
      } else {
        ++column;
      }
    }
  };
  while (i < src.size()) {
    char c = src[i];
    if (std::isspace(static_cast<unsigned char>(c))) {
      advance(1);
      continue;
    }
    if (c == '#' || (c == '/' && i + 1 < src.size() && src[i + 1] == '/')) {
      while (i < src.size() && src[i] != '\n') advance(1);
      continue;
    }
    Token tok;
    tok.line = line;
    tok.column = column;
    if (std::isalpha(static_cast<unsigned char>(c)) || c == '_') {
      size_t j = i;
      while (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) ||
                                src[j] == '_' || src[j] == '.')) {
        ++j;
      }
      tok.kind = Token::Kind::kIdent;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else if (std::isdigit(static_cast<unsigned char>(c))) {
      size_t j = i;
      int base = 10;
      if (c == '0' && i + 1 < src.size() && (src[i + 1] == 'x' || src[i + 1] == 'X')) {
        base = 16;
        j += 2;
      }
      size_t digits_begin = j;
      uint64_t value = 0;
      bool overflow = false;
      while (j < src.size() && std::isxdigit(static_cast<unsigned char>(src[j]))) {
        int digit = std::isdigit(static_cast<unsigned char>(src[j]))
                        ? src[j] - '0'
                        : std::tolower(static_cast<unsigned char>(src[j])) - 'a' + 10;
        if (digit >= base) break;
        uint64_t next = value * base + digit;
        if (base == 10 ? (value > (UINT64_MAX - digit) / 10)
                       : (value >> 60) != 0) {
          overflow = true;
        }
        value = next;
        ++j;
      }
      if (j == digits_begin) throw ParseError("malformed integer literal", line, column);
      if (j < src.size() && (std::isalnum(static_cast<unsigned char>(src[j])) || src[j] == '_')) {
        throw ParseError("malformed integer literal", line, column);
      }
      if (overflow) throw ParseError("integer literal out of range", line, column);
      tok.kind = Token::Kind::kInt;
      tok.int_value = value;
      tok.text = std::string(src.substr(i, j - i));
      advance(j - i);
    } else {
      static const char *kTwoChar[] = {"->", "<<", ">>", "==", "!=", "<=", ">="};
      tok.kind = Token::Kind::kPunct;
      bool matched = false;
      if (i + 1 < src.size()) {
        for (const char *op : kTwoChar) {
          if (src[i] == op[0] && src[i + 1] == op[1]) {
            tok.text = op;
            matched = true;
            break;
          }
        }
      }
      if (!matched) {
        if (std::string_view("(){},:=+-*/%&|^<>!~;").find(c) == std::string_view::npos) {
          throw ParseError(std::string("unexpected character '") + c + "'", line, column);
        }
        tok.text = std::string(1, c);
      }
      advance(tok.text.size());
    }
    tokens.push_back(std::move(tok));
  }
  Token eof;
  eof.line = line;
  eof.column = column;
  tokens.push_back(eof);
  return tokens;
}

const std::set<std::string> &BodyKeywords() {
  static const std::set<std::string> kKeywords = {
      "call",   "icall",   "goto",       "br",         "switch",   "case",
      "default", "return", "abort",      "input_byte", "input_read",
      "input_len", "fn",   "weak",       "table"};
  return kKeywords;
}

const std::map<std::string, BinOp> &BinOps() {
  static const std::map<std::string, BinOp> kOps = {
      {"+", BinOp::kAdd},  {"-", BinOp::kSub},  {"*", BinOp::kMul},
      {"/", BinOp::kDiv},  {"%", BinOp::kRem},  {"&", BinOp::kAnd},
      {"|", BinOp::kOr},   {"^", BinOp::kXor},  {"<<", BinOp::kShl},
      {">>", BinOp::kShr}, {"==", BinOp::kEq},  {"!=", BinOp::kNe},
      {"<", BinOp::kLt},   {"<=", BinOp::kLe},  {">", BinOp::kGt},
      {">=", BinOp::kGe}};
  return kOps;
}

class Parser {
 public:
  Parser(std::string_view source, std::string name)
      : tokens_(Tokenize(source)) {
    module_.name = std::move(name);
    module_.checksum = Fnv1a64(source.data(), source.size());
  }

  IrModule Parse() {
    const Token *entry_tok = nullptr;
    while (Peek().kind != Token::Kind::kEof) {
      const Token &tok = Peek();
      if (IsIdent(tok, "entry")) {
        Next();
        entry_tok = &ExpectIdent("function name");
        module_.entry_function = entry_tok->text;
      } else if (IsIdent(tok, "table")) {
        Next();
        module_.call_table.push_back(ExpectIdent("function name").text);
        while (IsPunct(Peek(), ",")) {
          Next();
          module_.call_table.push_back(ExpectIdent("function name").text);
        }
      } else if (IsIdent(tok, "weak")) {
        Next();
        if (!IsIdent(Peek(), "fn")) Fail(Peek(), "expected 'fn' after 'weak'");
        ParseFunction(/*weak=*/true);
      } else if (IsIdent(tok, "fn")) {
        ParseFunction(/*weak=*/false);
      } else if (IsPunct(tok, ";")) {
        Next();
      } else {
        Fail(tok, "expected 'fn', 'weak fn', 'entry' or 'table'");
      }
    }
    if (entry_tok != nullptr && module_.FindFunction(module_.entry_function) == nullptr) {
      Fail(*entry_tok, "entry function '" + module_.entry_function + "' is not defined");
    }
    return std::move(module_);
  }

 private:
  struct LabelRef {
    size_t block;
    size_t target_slot;
    std::string label;
    int line;
    int column;
  };

  const Token &Peek(size_t ahead = 0) const {
    size_t idx = std::min(pos_ + ahead, tokens_.size() - 1);
    return tokens_[idx];
  }
  const Token &Next() {
    const Token &tok = tokens_[pos_];
    if (pos_ + 1 < tokens_.size()) ++pos_;
    return tok;
  }
  static bool IsIdent(const Token &tok, std::string_view text) {
    return tok.kind == Token::Kind::kIdent && tok.text == text;
  }
  static bool IsPunct(const Token &tok, std::string_view text) {
    return tok.kind == Token::Kind::kPunct && tok.text == text;
  }
  [[noreturn]] static void Fail(const Token &tok, const std::string &message) {
    std::string found = tok.kind == Token::Kind::kEof ? "end of input" : "'" + tok.text + "'";
    throw ParseError(message + " (found " + found + ")", tok.line, tok.column);
  }
  void ExpectPunct(std::string_view text) {
    if (!IsPunct(Peek(), text)) Fail(Peek(), "expected '" + std::string(text) + "'");
    Next();
  }
  const Token &ExpectIdent(const std::string &what) {
    if (Peek().kind != Token::Kind::kIdent) Fail(Peek(), "expected " + what);
    return Next();
  }
  const Token &ExpectName(const std::string &what) {
    const Token &tok = ExpectIdent(what);
    if (BodyKeywords().count(tok.text)) Fail(tok, "keyword used as " + what);
    return tok;
  }

  int64_t ParseSignedInt() {
    bool negative = false;
    if (IsPunct(Peek(), "-")) {
      Next();
      negative = true;
    }
    if (Peek().kind != Token::Kind::kInt) Fail(Peek(), "expected integer");
    uint64_t value = Next().int_value;
    return static_cast<int64_t>(negative ? (~value + 1) : value);
  }

  int32_t SlotFor(const std::string &var) {
    auto it = slots_.find(var);
    if (it != slots_.end()) return it->second;
    int32_t slot = static_cast<int32_t>(fn_->slot_names.size());
    fn_->slot_names.push_back(var);
    slots_.emplace(var, slot);
    return slot;
  }

  bool StartsOperand(size_t ahead = 0) const {
    const Token &tok = Peek(ahead);
    if (tok.kind == Token::Kind::kInt) return true;
    if (IsPunct(tok, "-")) return Peek(ahead + 1).kind == Token::Kind::kInt;
    if (tok.kind == Token::Kind::kIdent) {
      return !BodyKeywords().count(tok.text) && !IsPunct(Peek(ahead + 1), ":") &&
             !IsPunct(Peek(ahead + 1), "=");
    }
    return false;
  }

  Operand ParseOperand() {
    const Token &tok = Peek();
    if (tok.kind == Token::Kind::kInt || IsPunct(tok, "-")) {
      return Operand::Const(ParseSignedInt());
    }
    if (tok.kind == Token::Kind::kIdent && !BodyKeywords().count(tok.text)) {
      Next();
      return Operand::Slot(SlotFor(tok.text));
    }
    Fail(tok, "expected variable or integer");
  }

  std::vector<Operand> ParseArgs() {
    std::vector<Operand> args;
    ExpectPunct("(");
    if (!IsPunct(Peek(), ")")) {
      args.push_back(ParseOperand());
      while (IsPunct(Peek(), ",")) {
        Next();
        args.push_back(ParseOperand());
      }
    }
    ExpectPunct(")");
    return args;
  }

  void ParseCall(Instr &instr) {
    const Token &kw = Next();
    if (kw.text == "call") {
      instr.kind = Instr::Kind::kCall;
      instr.callee = ExpectName("function name").text;
    } else {
      instr.kind = Instr::Kind::kIndirectCall;
      instr.a = ParseOperand();
    }
    instr.args = ParseArgs();
  }

  // Parses the right-hand side of `dst = ...`.
  void ParseRhs(Instr &instr) {
    const Token &tok = Peek();
    if (IsIdent(tok, "call") || IsIdent(tok, "icall")) {
      ParseCall(instr);
      return;
    }
    if (IsIdent(tok, "input_byte")) {
      Next();
      ExpectPunct("(");
      instr.kind = Instr::Kind::kInputByte;
      instr.a = ParseOperand();
      ExpectPunct(")");
      return;
    }
    if (IsIdent(tok, "input_read") || IsIdent(tok, "input_len")) {
      instr.kind = tok.text == "input_read" ? Instr::Kind::kInputRead : Instr::Kind::kInputLen;
      Next();
      ExpectPunct("(");
      ExpectPunct(")");
      return;
    }
    if (IsPunct(tok, "!") || IsPunct(tok, "~") ||
        (IsPunct(tok, "-") && Peek(1).kind == Token::Kind::kIdent)) {
      instr.kind = Instr::Kind::kUnary;
      instr.un_op = tok.text == "!" ? UnOp::kNot : tok.text == "~" ? UnOp::kBitNot : UnOp::kNeg;
      Next();
      instr.a = ParseOperand();
      return;
    }
    instr.a = ParseOperand();
    const Token &op = Peek();
    if (op.kind == Token::Kind::kPunct) {
      auto it = BinOps().find(op.text);
      if (it != BinOps().end()) {
        Next();
        instr.kind = Instr::Kind::kBinary;
        instr.bin_op = it->second;
        instr.b = ParseOperand();
        return;
      }
    }
    instr.kind = Instr::Kind::kMove;
  }

  void AddTarget(size_t block, Terminator &term, const Token &label_tok) {
    refs_.push_back({block, term.targets.size(), label_tok.text, label_tok.line, label_tok.column});
    term.targets.push_back(-1);
  }

  // Returns true once a terminator has been parsed.
  bool ParseStatement(size_t block_index) {
    IrBlock &block = fn_->blocks[block_index];
    const Token &tok = Peek();
    if (IsPunct(tok, ";")) {
      Next();
      return false;
    }
    Terminator &term = block.terminator;
    term.line = tok.line;
    if (IsIdent(tok, "goto")) {
      Next();
      term.kind = Terminator::Kind::kGoto;
      AddTarget(block_index, term, ExpectName("label"));
      return true;
    }
    if (IsIdent(tok, "br")) {
      Next();
      term.kind = Terminator::Kind::kBranch;
      term.value = ParseOperand();
      AddTarget(block_index, term, ExpectName("label"));
      AddTarget(block_index, term, ExpectName("label"));
      return true;
    }
    if (IsIdent(tok, "switch")) {
      Next();
      term.kind = Terminator::Kind::kSwitch;
      term.value = ParseOperand();
      std::set<int64_t> seen;
      while (IsIdent(Peek(), "case")) {
        const Token &case_tok = Next();
        int64_t value = ParseSignedInt();
        if (!seen.insert(value).second) Fail(case_tok, "duplicate case value");
        ExpectPunct("->");
        term.case_values.push_back(value);
        AddTarget(block_index, term, ExpectName("label"));
      }
      if (!IsIdent(Peek(), "default")) Fail(Peek(), "expected 'case' or 'default'");
      Next();
      AddTarget(block_index, term, ExpectName("label"));
      return true;
    }
    if (IsIdent(tok, "return")) {
      Next();
      term.kind = Terminator::Kind::kReturn;
      term.value = StartsOperand() ? ParseOperand() : Operand::Const(0);
      return true;
    }
    if (IsIdent(tok, "abort")) {
      Next();
      term.kind = Terminator::Kind::kAbort;
      return true;
    }
    Instr instr;
    instr.line = tok.line;
    if (IsIdent(tok, "call") || IsIdent(tok, "icall")) {
      ParseCall(instr);
      block.instructions.push_back(std::move(instr));
      return false;
    }
    if (tok.kind == Token::Kind::kIdent && IsPunct(Peek(1), "=")) {
      const Token &dst = ExpectName("variable name");
      Next();  // '='
      instr.dst = SlotFor(dst.text);
      ParseRhs(instr);
      block.instructions.push_back(std::move(instr));
      return false;
    }
    if (tok.kind == Token::Kind::kIdent && IsPunct(Peek(1), ":")) {
      Fail(tok, "block '" + block.label + "' has no terminator before label");
    }
    if (IsPunct(tok, "}")) Fail(tok, "block '" + block.label + "' has no terminator");
    Fail(tok, "expected instruction or terminator");
  }

  void ParseFunction(bool weak) {
    const Token &fn_tok = Next();  // 'fn'
    IrFunction fn;
    fn.weak = weak;
    fn.line = fn_tok.line;
    const Token &name_tok = ExpectName("function name");
    fn.name = name_tok.text;
    if (module_.FindFunction(fn.name) != nullptr) {
      Fail(name_tok, "duplicate function '" + fn.name + "'");
    }
    fn_ = &fn;
    slots_.clear();
    refs_.clear();
    ExpectPunct("(");
    if (!IsPunct(Peek(), ")")) {
      while (true) {
        const Token &param = ExpectName("parameter name");
        if (slots_.count(param.text)) Fail(param, "duplicate parameter");
        fn.params.push_back(param.text);
        SlotFor(param.text);
        if (!IsPunct(Peek(), ",")) break;
        Next();
      }
    }
    ExpectPunct(")");
    ExpectPunct("{");
    std::unordered_map<std::string, int32_t> labels;
    while (!IsPunct(Peek(), "}")) {
      const Token &label = Peek();
      if (label.kind != Token::Kind::kIdent || !IsPunct(Peek(1), ":")) {
        Fail(label, "expected block label");
      }
      if (BodyKeywords().count(label.text)) Fail(label, "keyword used as label");
      Next();
      Next();
      if (!labels.emplace(label.text, static_cast<int32_t>(fn.blocks.size())).second) {
        Fail(label, "duplicate label '" + label.text + "'");
      }
      IrBlock block;
      block.label = label.text;
      block.line = label.line;
      fn.blocks.push_back(std::move(block));
      size_t index = fn.blocks.size() - 1;
      while (!ParseStatement(index)) {
      }
    }
    const Token &close = Next();
    if (fn.blocks.empty()) Fail(close, "function '" + fn.name + "' has no blocks");
    for (const LabelRef &ref : refs_) {
      auto it = labels.find(ref.label);
      if (it == labels.end()) {
        throw ParseError("undefined label '" + ref.label + "'", ref.line, ref.column);
      }
      fn.blocks[ref.block].terminator.targets[ref.target_slot] = it->second;
    }
    fn_ = nullptr;
    module_.functions.push_back(std::move(fn));
  }

  std::vector<Token> tokens_;
  size_t pos_ = 0;
  IrModule module_;
  IrFunction *fn_ = nullptr;
  std::unordered_map<std::string, int32_t> slots_;
  std::vector<LabelRef> refs_;
};

const char *BinOpText(BinOp op) {
  switch (op) {
    case BinOp::kAdd: return "+";
    case BinOp::kSub: return "-";
    case BinOp::kMul: return "*";
    case BinOp::kDiv: return "/";
    case BinOp::kRem: return "%";
    case BinOp::kAnd: return "&";
    case BinOp::kOr: return "|";
    case BinOp::kXor: return "^";
    case BinOp::kShl: return "<<";
    case BinOp::kShr: return ">>";
    case BinOp::kEq: return "==";
    case BinOp::kNe: return "!=";
    case BinOp::kLt: return "<";
    case BinOp::kLe: return "<=";
    case BinOp::kGt: return ">";
    case BinOp::kGe: return ">=";
  }
  return "?";
}

}  // namespace

IrModule ParseModule(std::string_view source, std::string name) {
  return Parser(source, std::move(name)).Parse();
}

IrModule ParseModuleFile(const std::filesystem::path &path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw Error("cannot open " + path.string());
  std::stringstream buffer;
  buffer << in.rdbuf();
  return ParseModule(buffer.str(), path.filename().string());
}

std::string PrintModule(const IrModule &module) {
  std::ostringstream out;
  auto operand = [](const IrFunction &fn, const Operand &op) {
    return op.is_slot() ? fn.slot_names[op.value] : std::to_string(op.value);
  };
  auto args = [&](const IrFunction &fn, const std::vector<Operand> &list) {
    std::string s = "(";
    for (size_t i = 0; i < list.size(); ++i) {
      if (i) s += ", ";
      s += operand(fn, list[i]);
    }
    return s + ")";
  };
  if (!module.call_table.empty()) {
    out << "table ";
    for (size_t i = 0; i < module.call_table.size(); ++i) {
      out << (i ? ", " : "") << module.call_table[i];
    }
    out << "\n";
  }
  if (!module.entry_function.empty()) out << "entry " << module.entry_function << "\n";
  for (const IrFunction &fn : module.functions) {
    out << (fn.weak ? "weak fn " : "fn ") << fn.name << "(";
    for (size_t i = 0; i < fn.params.size(); ++i) out << (i ? ", " : "") << fn.params[i];
    out << ") {\n";
    for (const IrBlock &block : fn.blocks) {
      out << block.label << ":\n";
      for (const Instr &in : block.instructions) {
        out << "  ";
        if (in.dst >= 0) out << fn.slot_names[in.dst] << " = ";
        switch (in.kind) {
          case Instr::Kind::kMove: out << operand(fn, in.a); break;
          case Instr::Kind::kUnary:
            out << (in.un_op == UnOp::kNeg ? "-" : in.un_op == UnOp::kNot ? "!" : "~")
                << operand(fn, in.a);
            break;
          case Instr::Kind::kBinary:
            out << operand(fn, in.a) << " " << BinOpText(in.bin_op) << " " << operand(fn, in.b);
            break;
          case Instr::Kind::kInputByte: out << "input_byte(" << operand(fn, in.a) << ")"; break;
          case Instr::Kind::kInputRead: out << "input_read()"; break;
          case Instr::Kind::kInputLen: out << "input_len()"; break;
          case Instr::Kind::kCall: out << "call " << in.callee << args(fn, in.args); break;
          case Instr::Kind::kIndirectCall:
            out << "icall " << operand(fn, in.a) << args(fn, in.args);
            break;
        }
        out << "\n";
      }
      const Terminator &t = block.terminator;
      out << "  ";
      switch (t.kind) {
        case Terminator::Kind::kGoto: out << "goto " << fn.blocks[t.targets[0]].label; break;
        case Terminator::Kind::kBranch:
          out << "br " << operand(fn, t.value) << " " << fn.blocks[t.targets[0]].label << " "
              << fn.blocks[t.targets[1]].label;
          break;
        case Terminator::Kind::kSwitch:
          out << "switch " << operand(fn, t.value);
          for (size_t i = 0; i < t.case_values.size(); ++i) {
            out << " case " << t.case_values[i] << " -> " << fn.blocks[t.targets[i]].label;
          }
          out << " default " << fn.blocks[t.targets.back()].label;
          break;
        case Terminator::Kind::kReturn: out << "return " << operand(fn, t.value); break;
        case Terminator::Kind::kAbort: out << "abort"; break;
      }
      out << "\n";
    }
    out << "}\n";
  }
  return out.str();
}

}  // namespace reachfuzz

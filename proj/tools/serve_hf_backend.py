#!/usr/bin/env python3
"""Reference inference server hosting a Hugging Face masked LM for verbkit.

Exposes the JSON protocol consumed by the http(s) checkpoint backend:

  GET  /info        -> {vocab_size, hidden_size, max_length, mask_id,
                        bos_id, eos_id, special_ids}
  GET  /vocab       -> {tokens: [token text by id]}
  GET  /embeddings  -> input-embedding matrix as word2vec text
  POST /encode      -> {text, at_start} -> {ids}   (no special tokens added)
  POST /encode_word -> {word} -> {ids}             (leading-space convention)
  POST /mask_logits -> {ids, mask_pos} -> {values} (vocab logits at the mask)
  POST /mask_hidden -> {ids, mask_pos} -> {values} (hidden state at the mask)

Example:
  python tools/serve_hf_backend.py --checkpoint roberta-large --port 8787
  verbkit zero-shot --checkpoint http://127.0.0.1:8787 ...
"""

import argparse
import json
import sys
from http.server import BaseHTTPRequestHandler, ThreadingHTTPServer


def build_state(args):
    try:
        import torch
        from transformers import AutoModelForMaskedLM, AutoTokenizer
    except ImportError as e:
        sys.exit(f"error: this server needs torch and transformers installed ({e})")

    tokenizer = AutoTokenizer.from_pretrained(args.checkpoint)
    model = AutoModelForMaskedLM.from_pretrained(args.checkpoint)
    model.eval()
    device = torch.device(args.device)
    model.to(device)

    if tokenizer.mask_token_id is None:
        sys.exit("error: checkpoint has no mask token; a masked LM is required")

    vocab_size = model.get_input_embeddings().weight.shape[0]
    max_length = args.max_length or min(tokenizer.model_max_length, 512)
    tokens = tokenizer.convert_ids_to_tokens(list(range(vocab_size)))

    class State:
        pass

    st = State()
    st.torch = torch
    st.tokenizer = tokenizer
    st.model = model
    st.device = device
    st.info = {
        "vocab_size": vocab_size,
        "hidden_size": model.config.hidden_size,
        "max_length": max_length,
        "mask_id": tokenizer.mask_token_id,
        "bos_id": tokenizer.bos_token_id,
        "eos_id": tokenizer.eos_token_id,
        "special_ids": sorted(set(tokenizer.all_special_ids)),
    }
    st.tokens = tokens
    return st


def encode(st, text, at_start):
    # Mid-sequence text carries a leading space so BPE picks the spaced forms.
    if not at_start and not text.startswith(" "):
        text = " " + text
    return st.tokenizer.encode(text, add_special_tokens=False)


def encode_word(st, word):
    if not word:
        raise ValueError("label word must be non-empty")
    if not word.startswith(" "):
        word = " " + word
    ids = st.tokenizer.encode(word, add_special_tokens=False)
    if not ids:
        raise ValueError(f"label word has no tokens: {word!r}")
    return ids


def forward(st, ids, mask_pos, want_hidden):
    torch = st.torch
    if not 0 <= mask_pos < len(ids):
        raise ValueError("mask_pos out of range")
    if ids[mask_pos] != st.tokenizer.mask_token_id:
        raise ValueError("mask_pos does not point at the mask token")
    with torch.no_grad():
        batch = torch.tensor([ids], dtype=torch.long, device=st.device)
        out = st.model(input_ids=batch, output_hidden_states=want_hidden)
        if want_hidden:
            values = out.hidden_states[-1][0, mask_pos]
        else:
            values = out.logits[0, mask_pos]
    return values.double().cpu().tolist()


def embeddings_text(st):
    weight = st.model.get_input_embeddings().weight.detach().cpu()
    lines = [f"{weight.shape[0]} {weight.shape[1]}"]
    for i, token in enumerate(st.tokens):
        row = " ".join(f"{x:.8g}" for x in weight[i].tolist())
        lines.append(f"{token} {row}")
    return "\n".join(lines) + "\n"


def make_handler(st):
    class Handler(BaseHTTPRequestHandler):
        protocol_version = "HTTP/1.1"

        def _send(self, body, content_type="application/json", status=200):
            data = body.encode("utf-8")
            self.send_response(status)
            self.send_header("Content-Type", content_type)
            self.send_header("Content-Length", str(len(data)))
            self.end_headers()
            self.wfile.write(data)

        def _fail(self, message, status=400):
            self._send(json.dumps({"error": message}), status=status)

        def do_GET(self):
            if self.path == "/info":
                self._send(json.dumps(st.info))
            elif self.path == "/vocab":
                self._send(json.dumps({"tokens": st.tokens}))
            elif self.path == "/embeddings":
                self._send(embeddings_text(st), content_type="text/plain")
            else:
                self._fail("unknown endpoint", status=404)

        def do_POST(self):
            try:
                length = int(self.headers.get("Content-Length", "0"))
                req = json.loads(self.rfile.read(length) or b"{}")
                if self.path == "/encode":
                    ids = encode(st, req["text"], bool(req["at_start"]))
                    self._send(json.dumps({"ids": ids}))
                elif self.path == "/encode_word":
                    self._send(json.dumps({"ids": encode_word(st, req["word"])}))
                elif self.path in ("/mask_logits", "/mask_hidden"):
                    values = forward(st, req["ids"], req["mask_pos"],
                                     self.path == "/mask_hidden")
                    self._send(json.dumps({"values": values}))
                else:
                    self._fail("unknown endpoint", status=404)
            except (KeyError, ValueError, json.JSONDecodeError) as e:
                self._fail(str(e))

        def log_message(self, fmt, *log_args):  # quiet by default
            if st.verbose:
                super().log_message(fmt, *log_args)

    return Handler


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--checkpoint", default="roberta-large",
                    help="HF model name or local path (default: roberta-large)")
    ap.add_argument("--host", default="127.0.0.1")
    ap.add_argument("--port", type=int, default=8787)
    ap.add_argument("--device", default="cpu", help="torch device (cpu, cuda, ...)")
    ap.add_argument("--max-length", type=int, default=0,
                    help="override reported max sequence length")
    ap.add_argument("--verbose", action="store_true", help="log every request")
    args = ap.parse_args()

    st = build_state(args)
    st.verbose = args.verbose
    server = ThreadingHTTPServer((args.host, args.port), make_handler(st))
    print(f"serving {args.checkpoint} on http://{args.host}:{args.port}", flush=True)
    try:
        server.serve_forever()
    except KeyboardInterrupt:
        pass


if __name__ == "__main__":
    main()

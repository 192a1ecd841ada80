"""Regenerate the Tic-Tac-Toe endgame dataset by enumerating legal games.

Every board where x (moving first) has just completed a line, o has just
completed a line, or the board is full is a terminal position.  The class is
"positive" when x has three in a row.  The enumeration yields the 958
distinct boards of the classic UCI/OpenML table.
"""

import argparse
import csv

CELLS = ["top-left", "top-middle", "top-right", "middle-left", "middle-middle",
         "middle-right", "bottom-left", "bottom-middle", "bottom-right"]
LINES = [(0, 1, 2), (3, 4, 5), (6, 7, 8), (0, 3, 6), (1, 4, 7), (2, 5, 8), (0, 4, 8), (2, 4, 6)]


def wins(board, p):
    return any(all(board[i] == p for i in line) for line in LINES)


def terminal_boards():
    seen = {}
    stack = [("b" * 9, "x")]
    visited = set()
    while stack:
        board, turn = stack.pop()
        if board in visited:
            continue
        visited.add(board)
        if wins(board, "x") or wins(board, "o") or "b" not in board:
            seen[board] = "positive" if wins(board, "x") else "negative"
            continue
        nxt = "o" if turn == "x" else "x"
        for i, c in enumerate(board):
            if c == "b":
                stack.append((board[:i] + turn + board[i + 1:], nxt))
    return seen


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--out", default="data/tic-tac-toe.csv")
    args = ap.parse_args()
    boards = terminal_boards()
    with open(args.out, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(CELLS + ["class"])
        for board in sorted(boards, key=lambda b: (boards[b] != "positive", b)):
            w.writerow(list(board) + [boards[board]])
    n_pos = sum(v == "positive" for v in boards.values())
    print(f"wrote {len(boards)} boards ({n_pos} positive) to {args.out}")


if __name__ == "__main__":
    main()

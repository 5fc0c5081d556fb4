# Grade bookkeeping, used as a diff fuzzing corpus.

PASS_MARK = 55
WEIGHTS = [20, 30, 50]


def weighted(scores, weights):
    if len(scores) != len(weights):
        return None
    total = scores[0] * weights[0]
    total = total + scores[1] * weights[1]
    total = total + scores[2] * weights[2]
    return total / 100


def letter(mark):
    if mark is None:
        return "?"
    if mark >= 85:
        return "A"
    if mark >= 70:
        return "B"
    if mark >= PASS_MARK:
        return "C"
    return "F"


def passed(mark):
    if mark is None:
        return False
    return mark >= PASS_MARK


def tag_for(mark):
    if passed(mark):
        return "ok"
    return "retake"


def summarize(name, scores):
    mark = weighted(scores, WEIGHTS)
    grade = letter(mark)
    return [name, mark, grade, tag_for(mark)]


def better(left, right):
    if left is None:
        return right
    if right is None:
        return left
    if left[1] >= right[1]:
        return left
    return right


def best(records):
    top = None
    top = better(top, records[0])
    top = better(top, records[1])
    top = better(top, records[2])
    return top


rows = [
    summarize("ada", [90, 80, 95]),
    summarize("lin", [60, 55, 70]),
    summarize("kim", [40, 50, 45]),
]
champion = best(rows)
headline = champion[0] + ": " + champion[2]

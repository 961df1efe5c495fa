import type { ClientState } from "./state.js";

/**
 * Pure description of the screen. Everything shown comes from fields the
 * API delivered; the client derives nothing about review scores or hotel
 * quality on its own.
 */
export interface ViewModel {
  screen: "start" | "playing" | "transition" | "completed" | "error";
  heading: string;
  indicators: {
    stage: string;
    game: string;
    round: string;
    points: string;
    expert: string;
  } | null;
  feedbackBanner: { text: string; positive: boolean } | null;
  reviewPanels: { positive: string; negative: string } | null;
  introText: string | null;
  actionButtons: { visible: boolean; disabled: boolean };
  continueButton: { visible: boolean; label: string };
  retryVisible: boolean;
  notice: string | null;
  errorMessage: string | null;
  summaryLines: string[];
}

export function renderView(state: ClientState): ViewModel {
  const base: ViewModel = {
    screen: "start",
    heading: "Travel or Trouble",
    indicators: null,
    feedbackBanner: null,
    reviewPanels: null,
    introText: null,
    actionButtons: { visible: false, disabled: true },
    continueButton: { visible: false, label: "" },
    retryVisible: false,
    notice: state.notice,
    errorMessage: null,
    summaryLines: [],
  };

  if (state.phase === "error") {
    return {
      ...base,
      screen: "error",
      heading: "Something went wrong",
      errorMessage: state.errorMessage,
      retryVisible: true,
    };
  }

  if (state.phase === "completed") {
    const s = state.summary;
    return {
      ...base,
      screen: "completed",
      heading: "All six stages complete!",
      summaryLines: s
        ? [
            `Games played: ${s.games_completed}`,
            `Decisions made: ${s.decisions}`,
          ]
        : [],
    };
  }

  if (state.phase === "transition" && state.transition !== null) {
    const t = state.transition;
    const heading = t.stage_complete ? "Stage complete!" : "Game over";
    const label = t.stage_complete ? "Meet your next travel agent" : "Play the next game";
    return {
      ...base,
      screen: "transition",
      heading,
      feedbackBanner: { text: t.result_text, positive: t.earned_point },
      summaryLines: [`You finished the game with ${t.game_points} points.`],
      continueButton: { visible: true, label },
    };
  }

  if (state.round !== null && (state.phase === "round" || state.phase === "busy")) {
    const r = state.round;
    return {
      ...base,
      screen: "playing",
      heading: `${r.expert_name}'s review about the hotel`,
      indicators: {
        stage: `Stage ${r.stage_index}`,
        game: `Game ${r.game_index}`,
        round: `Round ${r.round_index}`,
        points: `${r.points} / ${r.points_target} points`,
        expert: r.expert_name,
      },
      feedbackBanner:
        r.feedback === null
          ? null
          : { text: r.feedback.result_text, positive: r.feedback.earned_point },
      reviewPanels: { positive: r.positive_text, negative: r.negative_text },
      // one action per round: buttons lock while a submission is in flight
      actionButtons: { visible: true, disabled: state.phase !== "round" },
    };
  }

  if (state.phase === "busy") {
    return { ...base, screen: "start", heading: "Loading…" };
  }

  return { ...base, introText: state.intro?.text ?? null };
}

const ESCAPES: Record<string, string> = {
  "&": "&amp;",
  "<": "&lt;",
  ">": "&gt;",
  '"': "&quot;",
};

export function escapeHtml(text: string): string {
  return text.replace(/[&<>"]/g, (ch) => ESCAPES[ch]);
}

export function renderHtml(vm: ViewModel): string {
  const parts: string[] = [`<h1>${escapeHtml(vm.heading)}</h1>`];
  if (vm.notice) parts.push(`<p class="notice">${escapeHtml(vm.notice)}</p>`);
  if (vm.indicators) {
    const ind = vm.indicators;
    parts.push(
      `<p class="indicators">${escapeHtml(
        [ind.stage, ind.game, ind.round, ind.points].join(" · "),
      )}</p>`,
    );
  }
  if (vm.feedbackBanner) {
    const tone = vm.feedbackBanner.positive ? "feedback-good" : "feedback-bad";
    parts.push(
      `<div class="feedback ${tone}">${escapeHtml(vm.feedbackBanner.text).replace(
        /\n/g,
        "<br>",
      )}</div>`,
    );
  }
  if (vm.screen === "start") {
    if (vm.introText) {
      parts.push(`<pre class="intro">${escapeHtml(vm.introText)}</pre>`);
    }
    parts.push(
      '<form id="start-form"><input id="alias" placeholder="Your name" required>' +
        '<button type="submit">Start playing</button></form>',
    );
  }
  if (vm.reviewPanels) {
    parts.push(
      '<div class="panels">' +
        `<section class="panel positive"><h2>Positive</h2><p>${escapeHtml(
          vm.reviewPanels.positive,
        )}</p></section>` +
        `<section class="panel negative"><h2>Negative</h2><p>${escapeHtml(
          vm.reviewPanels.negative,
        )}</p></section></div>`,
    );
  }
  if (vm.actionButtons.visible) {
    const disabled = vm.actionButtons.disabled ? " disabled" : "";
    parts.push(
      `<div class="actions"><button id="go"${disabled}>Go</button>` +
        `<button id="dont-go"${disabled}>Don't Go</button></div>`,
    );
  }
  for (const line of vm.summaryLines) {
    parts.push(`<p class="summary">${escapeHtml(line)}</p>`);
  }
  if (vm.continueButton.visible) {
    parts.push(`<button id="continue">${escapeHtml(vm.continueButton.label)}</button>`);
  }
  if (vm.errorMessage) {
    parts.push(`<p class="error">${escapeHtml(vm.errorMessage)}</p>`);
  }
  if (vm.retryVisible) {
    parts.push('<button id="retry">Try again</button>');
  }
  return parts.join("\n");
}

/**
 * Entry point: wires the view model to the DOM and drives the session loop.
 * The session id comes from the `session` query parameter; the service base
 * URL defaults to the origin serving the page (the service mounts this UI).
 */
import { ApiClient } from "./api.js";
import { SessionViewModel } from "./session.js";
import { renderApp } from "./view.js";

function requireMount(): HTMLElement {
  const mount = document.getElementById("app");
  if (!mount) throw new Error("missing #app mount point");
  return mount;
}

async function bootstrap(): Promise<void> {
  const mount = requireMount();
  const params = new URLSearchParams(window.location.search);
  const sessionId = params.get("session");
  if (!sessionId) {
    mount.textContent = "Add ?session=<id> to the URL to open a session.";
    return;
  }
  const api = new ApiClient(window.location.origin);
  const vm = new SessionViewModel(api, sessionId);

  const rerender = () => renderApp(document, vm, mount);

  mount.addEventListener("change", (event) => {
    const input = event.target as HTMLInputElement;
    if (input.type === "radio" && vm.assignment) {
      vm.setAnswer(input.name, input.value === "true");
      rerender();
    }
  });
  mount.addEventListener("input", (event) => {
    const area = event.target as HTMLTextAreaElement;
    if (area.classList?.contains("failure-note")) {
      vm.setFailureNote(area.value);
    }
  });
  mount.addEventListener("click", async (event) => {
    const target = event.target as HTMLElement;
    if (target.classList?.contains("finalize")) {
      await vm.finalize();
      rerender();
    }
  });
  mount.addEventListener("submit", async (event) => {
    event.preventDefault();
    try {
      await vm.submit();
    } catch {
      /* errorBanner is set; form state preserved for retry */
    }
    rerender();
  });

  try {
    await vm.advance();
  } catch (err) {
    vm.errorBanner = err instanceof Error ? err.message : String(err);
  }
  rerender();
}

bootstrap();
